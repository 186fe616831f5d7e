#include "qalt/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qalt {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

int parse_int(const std::string& tok, int line) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "expected an integer, got '" + tok + "'");
  }
}

// Accepts "[i..j]" and "[i]".
QubitRange parse_range(const std::string& tok, int line) {
  if (tok.size() < 3 || tok.front() != '[' || tok.back() != ']')
    throw ParseError(line, "expected a qubit range like [i..j], got '" + tok + "'");
  const std::string body = tok.substr(1, tok.size() - 2);
  const auto dots = body.find("..");
  QubitRange r;
  if (dots == std::string::npos) {
    r.lo = r.hi = parse_int(body, line);
  } else {
    r.lo = parse_int(body.substr(0, dots), line);
    r.hi = parse_int(body.substr(dots + 2), line);
  }
  if (r.lo < 0 || r.hi < r.lo) throw ParseError(line, "empty or negative qubit range '" + tok + "'");
  return r;
}

struct NamedRange {
  std::string name;
  QubitRange range;
};

void check_partition(const Circuit& c) {
  std::vector<NamedRange> regs;
  for (const auto& p : c.proofs) regs.push_back({"proof " + p.name, p.range});
  if (c.input) regs.push_back({"input", *c.input});
  for (std::size_t i = 0; i < c.ancillas.size(); ++i) regs.push_back({"ancilla", c.ancillas[i]});
  std::vector<std::string> owner(static_cast<std::size_t>(c.qubits));
  for (const auto& r : regs) {
    if (r.range.hi >= c.qubits)
      throw ValidationError(r.name + " range ends at qubit " + std::to_string(r.range.hi) +
                            " but the circuit has " + std::to_string(c.qubits) + " qubits");
    for (int q = r.range.lo; q <= r.range.hi; ++q) {
      auto& slot = owner[static_cast<std::size_t>(q)];
      if (!slot.empty())
        throw ValidationError("registers " + slot + " and " + r.name + " overlap at qubit " +
                              std::to_string(q));
      slot = r.name;
    }
  }
  for (int q = 0; q < c.qubits; ++q)
    if (owner[static_cast<std::size_t>(q)].empty())
      throw ValidationError("qubit " + std::to_string(q) + " belongs to no register");
  if (c.output < 0 || c.output >= c.qubits)
    throw ValidationError("output qubit " + std::to_string(c.output) + " out of range");
  for (const auto& g : c.gates) {
    const int n = g.arity();
    for (int i = 0; i < n; ++i) {
      if (g.q[i] < 0 || g.q[i] >= c.qubits)
        throw ValidationError("gate target " + std::to_string(g.q[i]) + " out of range");
      for (int j = i + 1; j < n; ++j)
        if (g.q[i] == g.q[j]) throw ValidationError("gate targets must be distinct");
    }
  }
}

}  // namespace

Circuit parse_circuit(const std::string& text) {
  Circuit c;
  bool saw_qubits = false, saw_output = false;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto toks = split_ws(s);
    const std::string& head = toks[0];
    if (head == "qubits") {
      if (toks.size() != 2) throw ParseError(line, "usage: qubits N");
      c.qubits = parse_int(toks[1], line);
      if (c.qubits <= 0) throw ParseError(line, "qubit count must be positive");
      saw_qubits = true;
    } else if (head == "proof") {
      if (toks.size() != 4 || toks[2] != "=") throw ParseError(line, "usage: proof <name> = [i..j]");
      for (const auto& p : c.proofs)
        if (p.name == toks[1]) throw ParseError(line, "duplicate proof register '" + toks[1] + "'");
      c.proofs.push_back({toks[1], parse_range(toks[3], line)});
    } else if (head == "input") {
      if (toks.size() != 3 || toks[1] != "=") throw ParseError(line, "usage: input = [i..j]");
      if (c.input) throw ParseError(line, "duplicate input block");
      c.input = parse_range(toks[2], line);
    } else if (head == "ancilla") {
      if (toks.size() != 3 || toks[1] != "=") throw ParseError(line, "usage: ancilla = [i..j]");
      c.ancillas.push_back(parse_range(toks[2], line));
    } else if (head == "output") {
      if (toks.size() != 2) throw ParseError(line, "usage: output K");
      c.output = parse_int(toks[1], line);
      saw_output = true;
    } else if (head == "gate") {
      if (toks.size() < 2) throw ParseError(line, "missing gate kind");
      Gate g;
      const std::string& kind = toks[1];
      if (kind == "H")
        g.kind = GateKind::H;
      else if (kind == "X")
        g.kind = GateKind::X;
      else if (kind == "CNOT")
        g.kind = GateKind::CNOT;
      else if (kind == "TOFFOLI")
        g.kind = GateKind::Toffoli;
      else
        throw ParseError(line, "unknown gate '" + kind + "'");
      const int arity = g.arity();
      if (static_cast<int>(toks.size()) != 2 + arity)
        throw ParseError(line, "gate " + kind + " takes " + std::to_string(arity) + " qubit argument(s)");
      for (int i = 0; i < arity; ++i) g.q[i] = parse_int(toks[2 + i], line);
      c.gates.push_back(g);
    } else {
      throw ParseError(line, "unknown directive '" + head + "'");
    }
  }
  if (!saw_qubits) throw ParseError("missing 'qubits' line");
  if (!saw_output) throw ParseError("missing 'output' line");
  check_partition(c);
  return c;
}

Circuit parse_circuit_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open circuit file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_circuit(buf.str());
}

std::string serialize_circuit(const Circuit& c) {
  std::ostringstream out;
  out << "qubits " << c.qubits << "\n";
  for (const auto& p : c.proofs)
    out << "proof " << p.name << " = [" << p.range.lo << ".." << p.range.hi << "]\n";
  if (c.input) out << "input = [" << c.input->lo << ".." << c.input->hi << "]\n";
  for (const auto& r : c.ancillas) out << "ancilla = [" << r.lo << ".." << r.hi << "]\n";
  out << "output " << c.output << "\n";
  for (const auto& g : c.gates) {
    switch (g.kind) {
      case GateKind::H:
        out << "gate H " << g.q[0] << "\n";
        break;
      case GateKind::X:
        out << "gate X " << g.q[0] << "\n";
        break;
      case GateKind::CNOT:
        out << "gate CNOT " << g.q[0] << " " << g.q[1] << "\n";
        break;
      case GateKind::Toffoli:
        out << "gate TOFFOLI " << g.q[0] << " " << g.q[1] << " " << g.q[2] << "\n";
        break;
    }
  }
  return out.str();
}

void apply_gate_span(Complex* v, int n, const Gate& g) {
  const std::size_t size = std::size_t(1) << n;
  // Qubit 0 is the most significant bit of the basis index.
  const auto mask = [n](int q) { return std::size_t(1) << (n - 1 - q); };
  switch (g.kind) {
    case GateKind::H: {
      const std::size_t m = mask(g.q[0]);
      for (std::size_t i = 0; i < size; ++i) {
        if (i & m) continue;
        const Complex x = v[i], y = v[i | m];
        v[i] = (x + y) * kInvSqrt2;
        v[i | m] = (x - y) * kInvSqrt2;
      }
      break;
    }
    case GateKind::X: {
      const std::size_t m = mask(g.q[0]);
      for (std::size_t i = 0; i < size; ++i) {
        if (i & m) continue;
        std::swap(v[i], v[i | m]);
      }
      break;
    }
    case GateKind::CNOT: {
      const std::size_t mc = mask(g.q[0]), mt = mask(g.q[1]);
      for (std::size_t i = 0; i < size; ++i) {
        if ((i & mc) && !(i & mt)) std::swap(v[i], v[i | mt]);
      }
      break;
    }
    case GateKind::Toffoli: {
      const std::size_t m1 = mask(g.q[0]), m2 = mask(g.q[1]), mt = mask(g.q[2]);
      for (std::size_t i = 0; i < size; ++i) {
        if ((i & m1) && (i & m2) && !(i & mt)) std::swap(v[i], v[i | mt]);
      }
      break;
    }
  }
}

CMat build_unitary(const Circuit& c) {
  if (c.qubits > 10) throw ResourceError("build_unitary: dense construction capped at 10 qubits");
  const std::size_t dim = std::size_t(1) << c.qubits;
  // Work on the transpose: row r of `b` is the evolving image of basis state r,
  // so gate kernels run over contiguous memory. Transpose once at the end.
  CMat b = CMat::identity(dim);
  for (const auto& g : c.gates) {
    const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(dim);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < rows; ++r) apply_gate_span(&b.a[static_cast<std::size_t>(r) * dim], c.qubits, g);
  }
  CMat u(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) u(i, j) = b(j, i);
  return u;
}

std::vector<int> zero_bits(const Circuit& c) { return std::vector<int>(static_cast<std::size_t>(c.qubits), 0); }

namespace {

std::size_t basis_index(const Circuit& c, const std::vector<int>& bits) {
  if (static_cast<int>(bits.size()) != c.qubits)
    throw ValidationError("bit assignment length does not match qubit count");
  std::size_t idx = 0;
  for (int q = 0; q < c.qubits; ++q) {
    const int b = bits[static_cast<std::size_t>(q)];
    if (b != 0 && b != 1) throw ValidationError("bit assignment entries must be 0 or 1");
    if (b && c.is_ancilla(q))
      throw ValidationError("ancilla qubit " + std::to_string(q) + " must start at 0");
    idx = (idx << 1) | static_cast<std::size_t>(b);
  }
  return idx;
}

}  // namespace

double accept_probability_float(const Circuit& c, const std::vector<int>& bits) {
  if (c.qubits > 20) throw ResourceError("accept_probability_float: capped at 20 qubits");
  const std::size_t dim = std::size_t(1) << c.qubits;
  std::vector<Complex> v(dim);
  v[basis_index(c, bits)] = 1.0;
  for (const auto& g : c.gates) apply_gate_span(v.data(), c.qubits, g);
  const std::size_t m = std::size_t(1) << (c.qubits - 1 - c.output);
  double p = 0.0;
  for (std::size_t i = 0; i < dim; ++i)
    if (i & m) p += std::norm(v[i]);
  return p;
}

AcceptOperator accept_operator(const Circuit& c) {
  if (c.proofs.empty()) throw ValidationError("accept_operator: circuit declares no proof registers");
  if (c.qubits > 10) throw ResourceError("accept_operator: capped at 10 qubits");
  const std::size_t dim = std::size_t(1) << c.qubits;

  AcceptOperator out;
  std::size_t pdim = 1;
  for (const auto& p : c.proofs) {
    out.dims.push_back(std::size_t(1) << p.range.width());
    pdim *= out.dims.back();
  }

  // Column a of W is the final state on proof basis input a (register 1 is the
  // most significant factor of a), all non-proof qubits starting at |0>.
  std::vector<std::vector<Complex>> w(pdim);
  const std::ptrdiff_t pn = static_cast<std::ptrdiff_t>(pdim);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t a = 0; a < pn; ++a) {
    std::size_t rem = static_cast<std::size_t>(a);
    std::size_t idx = 0;
    for (std::size_t r = c.proofs.size(); r-- > 0;) {
      const auto& range = c.proofs[r].range;
      const std::size_t val = rem % out.dims[r];
      rem /= out.dims[r];
      for (int t = 0; t < range.width(); ++t) {
        // Bit t of the register value counts from the least significant end,
        // which sits at the rightmost qubit of the range.
        if ((val >> t) & 1) idx |= std::size_t(1) << (c.qubits - 1 - (range.hi - t));
      }
    }
    std::vector<Complex> v(dim);
    v[idx] = 1.0;
    for (const auto& g : c.gates) apply_gate_span(v.data(), c.qubits, g);
    w[static_cast<std::size_t>(a)] = std::move(v);
  }

  const std::size_t outmask = std::size_t(1) << (c.qubits - 1 - c.output);
  out.op = CMat(pdim, pdim);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t a = 0; a < pn; ++a) {
    for (std::size_t b = 0; b < pdim; ++b) {
      Complex sum = 0.0;
      for (std::size_t z = 0; z < dim; ++z)
        if (z & outmask) sum += std::conj(w[static_cast<std::size_t>(a)][z]) * w[b][z];
      out.op(static_cast<std::size_t>(a), b) = sum;
    }
  }
  out.op = hermitize(out.op);

  const EigResult e = hermitian_eig(out.op);
  if (e.values.front() < -1e-9 || e.values.back() > 1.0 + 1e-9)
    throw ValidationError("accept_operator: extracted operator violates 0 ⪯ C ⪯ I");
  return out;
}

Circuit negate_output(const Circuit& c) {
  Circuit out = c;
  Gate g;
  g.kind = GateKind::X;
  g.q[0] = c.output;
  out.gates.push_back(g);
  return out;
}

std::string accept_operator_to_json(const AcceptOperator& op) {
  nlohmann::json j;
  j["dims"] = op.dims;
  nlohmann::json entries = nlohmann::json::array();
  for (const Complex& z : op.op.a) entries.push_back({z.real(), z.imag()});
  j["entries"] = entries;
  return j.dump();
}

AcceptOperator accept_operator_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("operator JSON: ") + e.what());
  }
  if (!j.contains("dims") || !j.contains("entries")) throw ParseError("operator JSON: missing dims/entries");
  AcceptOperator op;
  std::size_t dim = 1;
  for (const auto& d : j["dims"]) {
    op.dims.push_back(d.get<std::size_t>());
    dim *= op.dims.back();
  }
  if (op.dims.empty() || dim == 0) throw ParseError("operator JSON: empty register list");
  const auto& entries = j["entries"];
  if (entries.size() != dim * dim) throw ParseError("operator JSON: entry count does not match dims");
  op.op = CMat(dim, dim);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (!e.is_array() || e.size() != 2) throw ParseError("operator JSON: entries must be [re, im] pairs");
    op.op.a[i] = Complex(e[0].get<double>(), e[1].get<double>());
  }
  if (!is_hermitian(op.op, 1e-9)) throw ValidationError("operator JSON: matrix not Hermitian");
  const EigResult e = hermitian_eig(hermitize(op.op));
  if (e.values.front() < -1e-9 || e.values.back() > 1.0 + 1e-9)
    throw ValidationError("operator JSON: operator violates 0 ⪯ C ⪯ I");
  op.op = hermitize(op.op);
  return op;
}

}  // namespace qalt

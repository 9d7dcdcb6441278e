#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "roscert/synth.hpp"

namespace roscert::synth {

namespace {

constexpr const char* kHeader = "ros-cert certificate v1";

std::string number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw std::invalid_argument("certificate line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& text, int line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [end, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || end != last) fail(line, "expected a number, got '" + text + "'");
  return v;
}

}  // namespace

void write_certificate(const Certificate& cert, std::ostream& out) {
  out << kHeader << '\n';
  out << "program " << to_string(cert.kind) << '\n';
  out << "lambda " << number(cert.lambda) << '\n';
  out << "dim " << cert.dim << '\n';
  out << "identity_residual " << number(cert.identity_residual) << '\n';
  out << "gram_min_eig " << number(cert.gram_min_eig) << '\n';
  out << "objective " << number(cert.objective) << '\n';
  out << "V " << poly::to_string(cert.V) << '\n';
  for (const auto& [name, p] : cert.multipliers) out << "multiplier " << name << ' ' << poly::to_string(p) << '\n';
  out << "end\n";
}

Certificate read_certificate(std::istream& in) {
  Certificate cert;
  std::string text;
  int line = 0;
  if (!std::getline(in, text) || text != kHeader) fail(1, "missing header '" + std::string(kHeader) + "'");
  ++line;
  bool have_V = false;
  bool have_dim = false;
  bool ended = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    if (text == "end") {
      ended = true;
      break;
    }
    const auto space = text.find(' ');
    if (space == std::string::npos) fail(line, "expected 'key value'");
    const std::string key = text.substr(0, space);
    const std::string value = text.substr(space + 1);
    if (key == "program") {
      if (value == "manifold") {
        cert.kind = ProgramKind::kManifold;
      } else if (value == "equilibrium") {
        cert.kind = ProgramKind::kEquilibrium;
      } else {
        fail(line, "unknown program '" + value + "'");
      }
    } else if (key == "lambda") {
      cert.lambda = parse_number(value, line);
    } else if (key == "dim") {
      const double d = parse_number(value, line);
      if (d < 1 || d != static_cast<int>(d)) fail(line, "dim must be a positive integer");
      cert.dim = static_cast<int>(d);
      have_dim = true;
    } else if (key == "identity_residual") {
      cert.identity_residual = parse_number(value, line);
    } else if (key == "gram_min_eig") {
      cert.gram_min_eig = parse_number(value, line);
    } else if (key == "objective") {
      cert.objective = parse_number(value, line);
    } else if (key == "V" || key == "multiplier") {
      if (!have_dim) fail(line, "polynomial before dim");
      std::string name;
      std::string body = value;
      if (key == "multiplier") {
        const auto sep = value.find(' ');
        if (sep == std::string::npos) fail(line, "multiplier needs a name and a polynomial");
        name = value.substr(0, sep);
        body = value.substr(sep + 1);
      }
      poly::Poly p;
      try {
        p = poly::parse(body, cert.dim);
      } catch (const std::exception& e) {
        fail(line, e.what());
      }
      if (key == "V") {
        cert.V = std::move(p);
        have_V = true;
      } else {
        cert.multipliers.emplace_back(name, std::move(p));
      }
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }
  if (!have_V) fail(line, "no V line");
  if (!ended) fail(line, "missing 'end'");
  return cert;
}

}  // namespace roscert::synth

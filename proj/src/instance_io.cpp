#include "nlsolve/instance_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>

#include "nlsolve/errors.hpp"

namespace nlsolve {

namespace {

std::string_view strip(std::string_view line) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  const auto first = line.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = line.find_last_not_of(" \t\r");
  return line.substr(first, last - first + 1);
}

// Splits off the next whitespace-delimited token.
std::string_view next_token(std::string_view& rest) {
  const auto first = rest.find_first_not_of(" \t");
  if (first == std::string_view::npos) {
    rest = {};
    return {};
  }
  rest = rest.substr(first);
  const auto end = rest.find_first_of(" \t");
  const auto tok = rest.substr(0, end);
  rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
  return tok;
}

long long parse_int(std::string_view tok, std::size_t line, const char* what) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(std::string("expected integer ") + what + ", got '" + std::string(tok) + "'", line);
  }
  return value;
}

double parse_double(std::string_view tok, std::size_t line, const char* what) {
  const std::string s(tok);
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ParseError(std::string("expected real ") + what + ", got '" + s + "'", line);
  }
  if (!std::isfinite(value)) throw ParseError(std::string(what) + " is not finite", line);
  return value;
}

std::ifstream open_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

}  // namespace

Graph read_instance(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  long long n = -1;
  long long m = -1;
  std::vector<EdgeSpec> edges;
  std::map<std::string, NonlinearityHandle, std::less<>> cache;
  std::set<std::pair<long long, long long>> seen;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view rest = strip(raw);
    if (rest.empty()) continue;
    if (n < 0) {
      n = parse_int(next_token(rest), line_no, "node count");
      m = parse_int(next_token(rest), line_no, "edge count");
      if (!strip(rest).empty()) throw ParseError("header must be 'n m'", line_no);
      if (n <= 0 || m < 0) throw ParseError("header needs n > 0 and m >= 0", line_no);
      continue;
    }
    if (static_cast<long long>(edges.size()) == m) {
      throw ParseError("more edge lines than the declared " + std::to_string(m), line_no);
    }
    const long long u = parse_int(next_token(rest), line_no, "endpoint");
    const long long v = parse_int(next_token(rest), line_no, "endpoint");
    const std::string_view wtok = next_token(rest);
    if (wtok.empty()) throw ParseError("edge line must be 'u v w [nl_spec]'", line_no);
    const double w = parse_double(wtok, line_no, "weight");
    if (u < 0 || u >= n || v < 0 || v >= n) {
      throw ParseError("node index out of range [0, " + std::to_string(n) + ")", line_no);
    }
    const std::string spec(strip(rest).empty() ? std::string_view("identity") : strip(rest));

    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (!(w > 0.0)) throw ValidationError(where + "edge weight must be positive");
    if (u == v) throw ValidationError(where + "self loop");
    if (!seen.insert({std::min(u, v), std::max(u, v)}).second) {
      throw ValidationError(where + "parallel edge");
    }

    auto it = cache.find(spec);
    if (it == cache.end()) {
      try {
        it = cache.emplace(spec, std::make_shared<const Nonlinearity>(Nonlinearity::parse(spec))).first;
      } catch (const ParseError& e) {
        throw ParseError(e.what(), line_no);
      }
    }
    edges.push_back({static_cast<int>(u), static_cast<int>(v), w, it->second});
  }
  if (n < 0) throw ParseError("missing 'n m' header");
  if (static_cast<long long>(edges.size()) != m) {
    throw ParseError("declared " + std::to_string(m) + " edges, found " + std::to_string(edges.size()));
  }
  return Graph(static_cast<int>(n), std::move(edges));
}

Graph read_instance_file(const std::string& path) {
  auto in = open_file(path);
  return read_instance(in);
}

NodeVector read_vector(std::istream& in) {
  NodeVector out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view rest = strip(raw);
    if (rest.empty()) continue;
    const auto tok = next_token(rest);
    if (!strip(rest).empty()) throw ParseError("expected one value per line", line_no);
    out.push_back(parse_double(tok, line_no, "value"));
  }
  return out;
}

NodeVector read_vector_file(const std::string& path) {
  auto in = open_file(path);
  return read_vector(in);
}

void write_instance(std::ostream& out, const Graph& graph) {
  out << graph.num_nodes() << ' ' << graph.num_edges() << '\n';
  char buf[40];
  for (const auto& e : graph.edges()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.w);
    out << e.u << ' ' << e.v << ' ' << buf << ' ' << e.nl->to_spec() << '\n';
  }
}

}  // namespace nlsolve

#include "armagf/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

namespace armagf {

namespace {

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r") == std::string::npos; }

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

}  // namespace

Graph read_edge_list(std::istream& in, int min_nodes) {
  std::vector<Edge> edges;
  int max_index = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    {
      std::istringstream header(line);
      std::string hash, word;
      int count = 0;
      if (header >> hash >> word >> count && hash == "#" && word == "nodes") {
        min_nodes = std::max(min_nodes, count);
        continue;
      }
    }
    line = strip_comment(line);
    if (blank(line)) continue;
    std::istringstream fields(line);
    Edge e;
    if (!(fields >> e.i >> e.j)) {
      throw InvalidArgument("edge list line " + std::to_string(line_no) + ": expected 'i j [weight]'");
    }
    if (!(fields >> e.weight)) e.weight = 1.0;
    std::string extra;
    if (fields >> extra) {
      throw InvalidArgument("edge list line " + std::to_string(line_no) + ": trailing fields");
    }
    max_index = std::max({max_index, e.i, e.j});
    edges.push_back(e);
  }
  return Graph(std::max(max_index + 1, min_nodes), std::move(edges));
}

Graph read_edge_list_file(const std::string& path, int min_nodes) {
  auto in = open_or_throw(path);
  return read_edge_list(in, min_nodes);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# nodes " << g.num_nodes() << "\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const Edge& e : g.edges()) out << e.i << ' ' << e.j << ' ' << e.weight << '\n';
}

Signal read_signal(std::istream& in) {
  std::vector<Complex> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_comment(line);
    if (blank(line)) continue;
    std::istringstream fields(line);
    double re = 0.0, im = 0.0;
    if (!(fields >> re)) {
      throw InvalidArgument("signal line " + std::to_string(line_no) + ": expected 're im'");
    }
    if (!(fields >> im)) im = 0.0;
    values.emplace_back(re, im);
  }
  Signal x(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) x[static_cast<Eigen::Index>(i)] = values[i];
  if (!x.allFinite()) throw InvalidArgument("signal contains non-finite values");
  return x;
}

Signal read_signal_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_signal(in);
}

void write_signal(std::ostream& out, const Signal& x) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < x.size(); ++i) out << x[i].real() << ' ' << x[i].imag() << '\n';
}

}  // namespace armagf

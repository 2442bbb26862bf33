#pragma once

#include <iosfwd>
#include <string>

#include "armagf/graph.hpp"

namespace armagf {

/// Edge-list text: one `i j weight` triple per line (weight optional, default
/// 1), 0-indexed, `#` starts a comment. The node count is the largest index
/// plus one, raised to `min_nodes` or to a `# nodes N` header line.
Graph read_edge_list(std::istream& in, int min_nodes = 0);
Graph read_edge_list_file(const std::string& path, int min_nodes = 0);
void write_edge_list(std::ostream& out, const Graph& g);

/// Signal text: one complex value per line as `re im` (im optional).
Signal read_signal(std::istream& in);
Signal read_signal_file(const std::string& path);
void write_signal(std::ostream& out, const Signal& x);

}  // namespace armagf

#pragma once

#include "monex/operator_graph.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace monex {

/// Parsed input document: {"dim": n, "kind": "monotone"|"firmly"|
/// "nonexpansive", "graph": [{"x": [...], "y": [...]}, ...]}.
struct InputDocument {
    int dim = 0;
    Kind kind = Kind::Monotone;
    std::vector<GraphPair> graph;

    OperatorGraph to_graph() const;
};

InputDocument parse_document(const std::string& json_text);

/// Exit codes: 0 ok, 1 validation, 2 parse, 3 numeric, 4 I/O.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace monex

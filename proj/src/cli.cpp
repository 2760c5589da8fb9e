#include "monex/cli.hpp"

#include "monex/extension.hpp"
#include "monex/solvers.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace monex {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitParse = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct CliFailure {
    int code;
    std::string message;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliFailure{kExitIo, "cannot read '" + path + "'"};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_vec(const Vec& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) s += ',';
        s += fmt(v[i]);
    }
    return s;
}

Vec parse_point(const std::string& text, int dim) {
    std::vector<double> vals;
    std::size_t at = 0;
    while (at <= text.size()) {
        const std::size_t comma = text.find(',', at);
        const std::string tok =
            text.substr(at, comma == std::string::npos ? comma : comma - at);
        try {
            std::size_t used = 0;
            vals.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw CliFailure{kExitParse, "bad number '" + tok + "' in point"};
        }
        if (comma == std::string::npos) break;
        at = comma + 1;
    }
    if (static_cast<int>(vals.size()) != dim)
        throw CliFailure{kExitParse,
                         "point has " + std::to_string(vals.size()) +
                             " coordinates, expected " + std::to_string(dim)};
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = vals[i];
    return v;
}

void print_validation(std::ostream& out, const ValidationReport& rep) {
    if (rep.ok) {
        out << "ok\n";
        return;
    }
    out << "invalid: " << rep.violations.size() << " violating pair(s)\n";
    for (const auto& v : rep.violations)
        out << "  pair (" << v.i << ", " << v.j << ") slack " << fmt(v.slack)
            << "\n";
}

// Evaluation front shared by extend and grid: the nonexpansive extension
// for plain/kv inputs, the firmly nonexpansive (resolvent) extension for
// constrained/projected inputs.
struct Evaluator {
    std::optional<ExtensionOperator> ext;
    std::optional<Polytope> range;  // kv projection target
    bool nonexpansive_form = false;

    struct Row {
        Vec output;
        double gap;
        Vec resolvent_point;
    };

    Row eval(const Vec& x) const {
        auto det = ext->resolvent_detailed(x);
        Row row{Vec(), det.gap, det.point};
        if (nonexpansive_form) {
            Vec t = 2.0 * det.point - x;
            row.output = range ? range->project(t) : std::move(t);
        } else {
            row.output = det.point;
        }
        return row;
    }
};

Evaluator make_evaluator(const OperatorGraph& g, const std::string& variant) {
    Evaluator ev;
    if (variant == "plain" || variant == "kv") {
        if (g.kind() != Kind::Nonexpansive)
            throw CliFailure{kExitValidation,
                             std::string("variant '") + variant +
                                 "' needs nonexpansive input, got " +
                                 kind_name(g.kind())};
        ev.nonexpansive_form = true;
        if (variant == "kv") {
            std::vector<Vec> range_points;
            for (const auto& p : g.pairs()) range_points.push_back(p.y);
            ev.range = Polytope::hull(range_points, g.dim());
        }
        const OperatorGraph a = firmly_to_monotone(to_firmly(g));
        ev.ext = ExtensionOperator::build_plain(a);
        return ev;
    }
    if (variant != "constrained" && variant != "projected")
        throw CliFailure{kExitParse, "unknown variant '" + variant + "'"};
    if (g.kind() == Kind::Nonexpansive)
        throw CliFailure{kExitValidation,
                         std::string("variant '") + variant +
                             "' needs firmly or monotone input"};
    const OperatorGraph a =
        g.kind() == Kind::FirmlyNonexpansive ? firmly_to_monotone(g) : g;
    ev.ext = variant == "constrained"
                 ? ExtensionOperator::build_constrained(a)
                 : ExtensionOperator::build_projected(a);
    return ev;
}

OperatorGraph load_validated(const std::string& path, std::ostream& out) {
    const InputDocument doc = parse_document(read_file(path));
    const OperatorGraph g = doc.to_graph();
    const ValidationReport rep = validate(g);
    if (!rep.ok) {
        print_validation(out, rep);
        throw CliFailure{kExitValidation, "input graph is not a valid " +
                                              std::string(kind_name(g.kind())) +
                                              " graph"};
    }
    return g;
}

int cmd_validate(const std::string& path, std::ostream& out) {
    const InputDocument doc = parse_document(read_file(path));
    const ValidationReport rep = validate(doc.to_graph());
    print_validation(out, rep);
    return rep.ok ? kExitOk : kExitValidation;
}

int cmd_extend(const std::string& path, const std::string& variant,
               const std::vector<std::string>& at, bool verify,
               std::ostream& out) {
    const OperatorGraph g = load_validated(path, out);
    const Evaluator ev = make_evaluator(g, variant);
    for (const auto& spec_str : at) {
        const Vec x = parse_point(spec_str, g.dim());
        const Evaluator::Row row = ev.eval(x);
        out << fmt_vec(row.output);
        if (verify) {
            out << " gap=" << fmt(row.gap);
            if (ev.ext->variant() != Variant::SubspaceProjected) {
                const Vec u = row.resolvent_point;
                const PsiValue pv = ev.ext->program().psi_eval(u, x - u);
                if (pv.certificate)
                    out << " fenchel_gap=" << fmt(pv.certificate->fenchel_gap)
                        << " linear_gap=" << fmt(pv.certificate->linear_gap);
            }
        }
        out << "\n";
    }
    return kExitOk;
}

int cmd_grid(const std::string& path, const std::string& variant,
             const std::vector<std::string>& bbox, int resolution,
             const std::string& output, std::ostream& out) {
    const OperatorGraph g = load_validated(path, out);
    const int n = g.dim();
    if (n > 3) throw CliFailure{kExitParse, "grid supports dim <= 3"};
    if (resolution < 2)
        throw CliFailure{kExitParse, "resolution must be >= 2"};
    if (bbox.empty()) throw CliFailure{kExitParse, "--bbox required"};
    if (bbox.size() != 1 && static_cast<int>(bbox.size()) != n)
        throw CliFailure{kExitParse, "need one --bbox or one per axis"};

    std::vector<std::pair<double, double>> box;
    for (const auto& spec_str : bbox) {
        const auto sep = spec_str.find("..");
        if (sep == std::string::npos)
            throw CliFailure{kExitParse, "bbox must be lo..hi"};
        try {
            box.emplace_back(std::stod(spec_str.substr(0, sep)),
                             std::stod(spec_str.substr(sep + 2)));
        } catch (const std::exception&) {
            throw CliFailure{kExitParse, "bad bbox '" + spec_str + "'"};
        }
    }
    while (static_cast<int>(box.size()) < n) box.push_back(box.front());

    const Evaluator ev = make_evaluator(g, variant);

    std::string csv;
    for (int k = 0; k < n; ++k) csv += "x" + std::to_string(k + 1) + ",";
    for (int k = 0; k < n; ++k) csv += "t" + std::to_string(k + 1) + ",";
    csv += "gap\n";

    std::vector<int> idx(n, 0);
    Vec x(n);
    while (true) {
        for (int k = 0; k < n; ++k)
            x[k] = box[k].first + (box[k].second - box[k].first) * idx[k] /
                                      (resolution - 1);
        const Evaluator::Row row = ev.eval(x);
        csv += fmt_vec(x) + "," + fmt_vec(row.output) + "," + fmt(row.gap) +
               "\n";
        int k = n - 1;
        while (k >= 0 && idx[k] == resolution - 1) idx[k--] = 0;
        if (k < 0) break;
        ++idx[k];
    }

    if (output.empty() || output == "-") {
        out << csv;
    } else {
        std::ofstream f(output, std::ios::binary);
        if (!f) throw CliFailure{kExitIo, "cannot write '" + output + "'"};
        f << csv;
        if (!f.good())
            throw CliFailure{kExitIo, "write failed for '" + output + "'"};
    }
    return kExitOk;
}

}  // namespace

OperatorGraph InputDocument::to_graph() const {
    try {
        return OperatorGraph(dim, kind, graph);
    } catch (const StructuralError& e) {
        throw CliFailure{kExitParse, e.what()};
    }
}

InputDocument parse_document(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw CliFailure{kExitParse, std::string("JSON parse error: ") + e.what()};
    }
    try {
        InputDocument doc;
        doc.dim = j.at("dim").get<int>();
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "monotone") {
            doc.kind = Kind::Monotone;
        } else if (kind == "firmly") {
            doc.kind = Kind::FirmlyNonexpansive;
        } else if (kind == "nonexpansive") {
            doc.kind = Kind::Nonexpansive;
        } else {
            throw CliFailure{kExitParse, "unknown kind '" + kind + "'"};
        }
        for (const auto& entry : j.at("graph")) {
            const auto xv = entry.at("x").get<std::vector<double>>();
            const auto yv = entry.at("y").get<std::vector<double>>();
            GraphPair p{Vec(static_cast<Eigen::Index>(xv.size())),
                        Vec(static_cast<Eigen::Index>(yv.size()))};
            for (std::size_t i = 0; i < xv.size(); ++i)
                p.x[static_cast<Eigen::Index>(i)] = xv[i];
            for (std::size_t i = 0; i < yv.size(); ++i)
                p.y[static_cast<Eigen::Index>(i)] = yv[i];
            doc.graph.push_back(std::move(p));
        }
        return doc;
    } catch (const nlohmann::json::exception& e) {
        throw CliFailure{kExitParse, std::string("bad document: ") + e.what()};
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"constructive extension of monotone operators and "
                 "nonexpansive maps from finite graph data"};
    app.require_subcommand(1);

    std::string file, variant = "plain", output;
    std::vector<std::string> at, bbox;
    bool verify = false;
    int resolution = 33;

    auto* validate_cmd =
        app.add_subcommand("validate", "check the kind-specific inequalities");
    validate_cmd->add_option("file", file, "input JSON document")->required();

    auto* extend_cmd = app.add_subcommand(
        "extend", "evaluate an extension at query points");
    extend_cmd->add_option("file", file)->required();
    extend_cmd->add_option("--variant", variant,
                           "plain|constrained|projected|kv");
    extend_cmd->add_option("--at", at, "query point v1,v2,...")->required();
    extend_cmd->add_flag("--verify", verify,
                         "also print membership gap and certificate residuals");

    auto* grid_cmd =
        app.add_subcommand("grid", "evaluate over a grid, emit CSV");
    grid_cmd->add_option("file", file)->required();
    grid_cmd->add_option("--variant", variant);
    grid_cmd->add_option("--bbox", bbox, "lo..hi per axis")->required();
    grid_cmd->add_option("--resolution", resolution, "nodes per axis");
    grid_cmd->add_option("--output", output, "CSV path ('-' = stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        return kExitParse;
    }

    try {
        if (validate_cmd->parsed()) return cmd_validate(file, out);
        if (extend_cmd->parsed())
            return cmd_extend(file, variant, at, verify, out);
        return cmd_grid(file, variant, bbox, resolution, output, out);
    } catch (const CliFailure& f) {
        err << "error: " << f.message << "\n";
        return f.code;
    } catch (const SolverError& e) {
        err << "error: " << e.what() << " (status "
            << status_name(e.report.status) << ")\n";
        return kExitNumeric;
    } catch (const ConsistencyError& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const LimitError& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const StructuralError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace monex

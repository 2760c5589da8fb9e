#pragma once

#include "monex/operator_graph.hpp"
#include "monex/polyhedral.hpp"
#include "monex/proximal_average.hpp"
#include "monex/types.hpp"

#include <optional>

namespace monex {

enum class Variant { Plain, DomainConstrained, SubspaceProjected };

const char* variant_name(Variant v);

/// Maximal monotone extension of a finite monotone graph, exposed through
/// its resolvent J = (Id + M)^{-1} (single-valued and everywhere defined).
///
///   Plain              M = the proximal-average extension Atilde
///   DomainConstrained  M = extension of A + N_D, D = conv(domain points)
///   SubspaceProjected  M = Q*BQ + N_D with B a plain extension of the
///                      graph projected onto the span of its (translated)
///                      domain; evaluated by Douglas-Rachford splitting
///
/// Immutable after build; resolvent calls are pure.
class ExtensionOperator {
public:
    static ExtensionOperator build_plain(const OperatorGraph& g);
    static ExtensionOperator build_constrained(const OperatorGraph& g);
    static ExtensionOperator build_projected(const OperatorGraph& g);

    Variant variant() const { return variant_; }
    int dim() const { return source_.dim(); }
    const OperatorGraph& source() const { return source_; }

    struct Evaluation {
        Vec point;
        double gap;  // membership gap (plain/constrained) or DR residual
        long iterations;
    };

    Vec resolvent(const Vec& x) const;
    Evaluation resolvent_detailed(const Vec& x) const;

    /// Underlying proximal-average program (Plain / DomainConstrained).
    const PsiProgram& program() const;
    /// D = conv(domain points); present for the localized variants.
    const std::optional<Polytope>& domain_hull() const { return hull_; }

private:
    struct ProjectedData {
        Vec translation;       // centroid of the domain points
        Mat basis;             // span of the translated domain; may be 0 cols
        std::optional<PsiProgram> inner;  // plain program in span coords
        Polytope hull_translated;
    };

    ExtensionOperator(Variant v, OperatorGraph g, std::optional<PsiProgram> p,
                      std::optional<Polytope> hull,
                      std::optional<ProjectedData> proj);

    Evaluation resolvent_projected(const Vec& x) const;

    Variant variant_;
    OperatorGraph source_;
    std::optional<PsiProgram> prog_;
    std::optional<Polytope> hull_;
    std::optional<ProjectedData> proj_;
};

/// Callable nonexpansive extension: T~(x) = 2 J(x) - x for the chosen
/// variant's monotone extension, optionally followed by the projection
/// onto conv(range points) for the Kirszbraun-Valentine form.
class NonexpansiveMap {
public:
    NonexpansiveMap(ExtensionOperator ext, std::optional<Polytope> range);

    Vec operator()(const Vec& x) const;

    const ExtensionOperator& monotone_extension() const { return ext_; }
    const std::optional<Polytope>& range_hull() const { return range_; }

private:
    ExtensionOperator ext_;
    std::optional<Polytope> range_;
};

/// Five-step pipeline: F = (Id+T)/2, A = F^{-1} - Id, extend A by the
/// chosen variant, then T~ = 2(Id+M)^{-1} - Id.
NonexpansiveMap extend_nonexpansive(const OperatorGraph& t, Variant v);

/// Kirszbraun-Valentine form: plain pipeline followed by the projection
/// onto conv(range of t); output always lies in that hull.
NonexpansiveMap extend_kv(const OperatorGraph& t);

}  // namespace monex

#pragma once

// Textual mini-language for increment distributions.
//
//   expr     := leaf | "neg" "(" expr ")" | "shift" "(" param "," expr ")"
//             | "mix" "(" weighted { "," weighted } ")"
//   leaf     := name "(" param { "," param } ")"
//   param    := [ ident "=" ] number
//   weighted := number ":" expr
//   number   := decimal literal, optional exponent (no expressions)
//
// Leaves and their parameters, in positional order:
//   pareto(alpha, kappa)     tail (kappa / (kappa + x))^alpha
//   lognormal(mu, sigma)     log X ~ Normal(mu, sigma^2)
//   weibull(shape, scale)    tail exp(-(x / scale)^shape)
//   exponential(rate)        tail exp(-rate x)
//   point(c)                 unit mass at c

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "htwk/error.hpp"

namespace htwk::distspec {

struct SourceSpan {
    std::size_t start = 0;
    std::size_t end = 0;
};

enum class NodeKind { pareto, lognormal, weibull, exponential, point, neg, mix, shift };

std::string_view kind_name(NodeKind kind);

struct DistExpr {
    NodeKind kind = NodeKind::point;
    /// Named parameters in canonical order for the node kind.
    std::vector<std::pair<std::string, double>> params;
    std::vector<DistExpr> children;
    /// Mixture weights, one per child (mix only).
    std::vector<double> weights;
    /// Location in the source text; ignored by structural equality.
    SourceSpan span;

    double param(std::string_view name) const;

    friend bool operator==(const DistExpr& a, const DistExpr& b);
};

enum class ParseErrorKind { syntax, unknown_name, bad_domain, bad_weights, bad_support };

class ParseError : public Error {
public:
    ParseError(ParseErrorKind kind, SourceSpan span, const std::string& message);

    ParseErrorKind kind() const noexcept { return kind_; }
    SourceSpan span() const noexcept { return span_; }

private:
    ParseErrorKind kind_;
    SourceSpan span_;
};

/// Parses and validates a distribution expression.
DistExpr parse_spec(std::string_view text);

/// Canonical printer; named parameters, shortest round-tripping reals.
std::string format_spec(const DistExpr& expr);

/// Checks the DistExpr invariants (domains, weights, neg support).
void validate(const DistExpr& expr);

/// Lower end of the support of the expression (may be -inf).
double support_lower(const DistExpr& expr);

// Builders, mostly for tests and fixtures.
DistExpr pareto(double alpha, double kappa);
DistExpr lognormal(double mu, double sigma);
DistExpr weibull(double shape, double scale);
DistExpr exponential(double rate);
DistExpr point(double c);
DistExpr neg(DistExpr child);
DistExpr shift(double c, DistExpr child);
DistExpr mix(std::vector<std::pair<double, DistExpr>> parts);

/// The reference model: positive part pareto(1.5, 1), negative part pareto(0.5, 1).
inline constexpr std::string_view default_model_spec =
    "mix(0.5: pareto(alpha=1.5, kappa=1), 0.5: neg(pareto(alpha=0.5, kappa=1)))";

}  // namespace htwk::distspec

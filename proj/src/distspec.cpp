#include "htwk/distspec.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace htwk::distspec {

namespace {

struct KindInfo {
    NodeKind kind;
    std::string_view name;
    std::array<std::string_view, 2> params;
    int n_params;
};

constexpr std::array<KindInfo, 8> kKinds{{
    {NodeKind::pareto, "pareto", {"alpha", "kappa"}, 2},
    {NodeKind::lognormal, "lognormal", {"mu", "sigma"}, 2},
    {NodeKind::weibull, "weibull", {"shape", "scale"}, 2},
    {NodeKind::exponential, "exponential", {"rate", ""}, 1},
    {NodeKind::point, "point", {"c", ""}, 1},
    {NodeKind::neg, "neg", {"", ""}, 0},
    {NodeKind::mix, "mix", {"", ""}, 0},
    {NodeKind::shift, "shift", {"c", ""}, 1},
}};

const KindInfo& info(NodeKind kind) {
    for (const auto& k : kKinds) {
        if (k.kind == kind) return k;
    }
    throw Error("unknown node kind");
}

std::optional<NodeKind> lookup(std::string_view name) {
    for (const auto& k : kKinds) {
        if (k.name == name) return k.kind;
    }
    return std::nullopt;
}

std::string format_real(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw Error("cannot format real");
    return std::string(buf.data(), ptr);
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    DistExpr parse_top() {
        skip_ws();
        if (pos_ >= text_.size()) fail_syntax("empty distribution spec");
        DistExpr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail_syntax("unexpected trailing input");
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(ParseErrorKind kind, std::size_t start, std::size_t end,
                           const std::string& msg) const {
        throw ParseError(kind, SourceSpan{start, std::min(end, text_.size())}, msg);
    }

    [[noreturn]] void fail_syntax(const std::string& msg) const {
        fail(ParseErrorKind::syntax, pos_, pos_ + 1, msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() &&
               (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                text_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c) {
            fail_syntax(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    static bool ident_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool ident_char(char c) {
        return ident_start(c) || (c >= '0' && c <= '9');
    }

    bool at_ident() {
        skip_ws();
        return pos_ < text_.size() && ident_start(text_[pos_]);
    }

    std::string_view ident() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ >= text_.size() || !ident_start(text_[pos_])) fail_syntax("expected a name");
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        return text_.substr(start, pos_ - start);
    }

    // Lookahead: is the next token `ident =`?
    bool at_named_param() {
        skip_ws();
        std::size_t save = pos_;
        if (!at_ident()) return false;
        ident();
        bool named = peek('=');
        pos_ = save;
        return named;
    }

    double number() {
        skip_ws();
        std::size_t start = pos_;
        std::size_t p = pos_;
        if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
        std::size_t digits = 0;
        while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p, ++digits;
        if (p < text_.size() && text_[p] == '.') {
            ++p;
            while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p, ++digits;
        }
        if (digits == 0) fail(ParseErrorKind::syntax, start, start + 1, "expected a decimal number");
        if (p < text_.size() && (text_[p] == 'e' || text_[p] == 'E')) {
            std::size_t q = p + 1;
            if (q < text_.size() && (text_[q] == '+' || text_[q] == '-')) ++q;
            std::size_t exp_digits = 0;
            while (q < text_.size() && std::isdigit(static_cast<unsigned char>(text_[q]))) ++q, ++exp_digits;
            if (exp_digits == 0) fail(ParseErrorKind::syntax, start, q, "malformed exponent");
            p = q;
        }
        // from_chars rejects a leading '+'.
        std::size_t first = (text_[start] == '+') ? start + 1 : start;
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + first, text_.data() + p, value);
        if (ec != std::errc{} || ptr != text_.data() + p || !std::isfinite(value)) {
            fail(ParseErrorKind::syntax, start, p, "number out of range");
        }
        pos_ = p;
        return value;
    }

    // Parses `[name =] number` into the slot list of `kind`.
    void param_into(const KindInfo& ki, std::vector<std::optional<double>>& slots,
                    int& positional) {
        skip_ws();
        std::size_t start = pos_;
        if (at_named_param()) {
            std::string_view name = ident();
            expect('=');
            double v = number();
            int idx = -1;
            for (int i = 0; i < ki.n_params; ++i) {
                if (ki.params[i] == name) idx = i;
            }
            if (idx < 0) {
                fail(ParseErrorKind::unknown_name, start, start + name.size(),
                     "unknown parameter '" + std::string(name) + "' for " + std::string(ki.name));
            }
            if (slots[idx]) fail(ParseErrorKind::syntax, start, pos_, "duplicate parameter '" + std::string(name) + "'");
            slots[idx] = v;
        } else {
            double v = number();
            while (positional < ki.n_params && slots[positional]) ++positional;
            if (positional >= ki.n_params) {
                fail(ParseErrorKind::syntax, start, pos_, "too many parameters for " + std::string(ki.name));
            }
            slots[positional++] = v;
        }
    }

    DistExpr finish_params(const KindInfo& ki, const std::vector<std::optional<double>>& slots,
                           std::size_t start) {
        DistExpr e;
        e.kind = ki.kind;
        for (int i = 0; i < ki.n_params; ++i) {
            if (!slots[i]) {
                fail(ParseErrorKind::syntax, start, pos_,
                     "missing parameter '" + std::string(ki.params[i]) + "' for " + std::string(ki.name));
            }
            e.params.emplace_back(std::string(ki.params[i]), *slots[i]);
        }
        return e;
    }

    DistExpr parse_expr() {
        skip_ws();
        std::size_t start = pos_;
        if (!at_ident()) fail_syntax("expected a distribution name");
        std::string_view name = ident();
        auto kind = lookup(name);
        if (!kind) {
            fail(ParseErrorKind::unknown_name, start, pos_,
                 "unknown distribution '" + std::string(name) + "'");
        }
        const KindInfo& ki = info(*kind);
        expect('(');
        DistExpr e;
        switch (*kind) {
            case NodeKind::neg: {
                e.kind = NodeKind::neg;
                e.children.push_back(parse_expr());
                break;
            }
            case NodeKind::shift: {
                std::vector<std::optional<double>> slots(1);
                int positional = 0;
                param_into(ki, slots, positional);
                expect(',');
                DistExpr child = parse_expr();
                e = finish_params(ki, slots, start);
                e.children.push_back(std::move(child));
                break;
            }
            case NodeKind::mix: {
                e.kind = NodeKind::mix;
                do {
                    double w = number();
                    expect(':');
                    e.weights.push_back(w);
                    e.children.push_back(parse_expr());
                } while (peek(',') && (expect(','), true));
                break;
            }
            default: {
                std::vector<std::optional<double>> slots(ki.n_params);
                int positional = 0;
                if (!peek(')')) {
                    param_into(ki, slots, positional);
                    while (peek(',')) {
                        expect(',');
                        param_into(ki, slots, positional);
                    }
                }
                e = finish_params(ki, slots, start);
                break;
            }
        }
        expect(')');
        e.span = SourceSpan{start, pos_};
        validate(e);
        return e;
    }
};

[[noreturn]] void domain_fail(const DistExpr& e, const std::string& msg) {
    throw ParseError(ParseErrorKind::bad_domain, e.span, msg);
}

void format_into(const DistExpr& e, std::ostringstream& out) {
    out << kind_name(e.kind) << '(';
    switch (e.kind) {
        case NodeKind::neg:
            format_into(e.children.at(0), out);
            break;
        case NodeKind::shift:
            out << "c=" << format_real(e.param("c")) << ", ";
            format_into(e.children.at(0), out);
            break;
        case NodeKind::mix:
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) out << ", ";
                out << format_real(e.weights.at(i)) << ": ";
                format_into(e.children[i], out);
            }
            break;
        default:
            for (std::size_t i = 0; i < e.params.size(); ++i) {
                if (i) out << ", ";
                out << e.params[i].first << '=' << format_real(e.params[i].second);
            }
            break;
    }
    out << ')';
}

}  // namespace

std::string_view kind_name(NodeKind kind) { return info(kind).name; }

double DistExpr::param(std::string_view name) const {
    for (const auto& [k, v] : params) {
        if (k == name) return v;
    }
    throw Error("missing parameter " + std::string(name));
}

bool operator==(const DistExpr& a, const DistExpr& b) {
    return a.kind == b.kind && a.params == b.params && a.weights == b.weights &&
           a.children == b.children;
}

ParseError::ParseError(ParseErrorKind kind, SourceSpan span, const std::string& message)
    : Error(message + " at [" + std::to_string(span.start) + "," + std::to_string(span.end) + ")"),
      kind_(kind),
      span_(span) {}

double support_lower(const DistExpr& e) {
    switch (e.kind) {
        case NodeKind::point:
            return e.param("c");
        case NodeKind::neg:
            return -std::numeric_limits<double>::infinity();
        case NodeKind::shift:
            return e.param("c") + support_lower(e.children.at(0));
        case NodeKind::mix: {
            double lo = std::numeric_limits<double>::infinity();
            for (const auto& c : e.children) lo = std::min(lo, support_lower(c));
            return lo;
        }
        default:
            return 0.0;
    }
}

void validate(const DistExpr& e) {
    const KindInfo& ki = info(e.kind);
    if (static_cast<int>(e.params.size()) != ki.n_params) domain_fail(e, "wrong parameter count");
    for (int i = 0; i < ki.n_params; ++i) {
        if (e.params[i].first != ki.params[i]) domain_fail(e, "parameter order mismatch");
        if (!std::isfinite(e.params[i].second)) domain_fail(e, "non-finite parameter");
    }
    switch (e.kind) {
        case NodeKind::pareto:
            if (!(e.param("alpha") > 0)) domain_fail(e, "pareto requires alpha > 0");
            if (!(e.param("kappa") > 0)) domain_fail(e, "pareto requires kappa > 0");
            break;
        case NodeKind::lognormal:
            if (!(e.param("sigma") > 0)) domain_fail(e, "lognormal requires sigma > 0");
            break;
        case NodeKind::weibull:
            if (!(e.param("shape") > 0)) domain_fail(e, "weibull requires shape > 0");
            if (!(e.param("scale") > 0)) domain_fail(e, "weibull requires scale > 0");
            break;
        case NodeKind::exponential:
            if (!(e.param("rate") > 0)) domain_fail(e, "exponential requires rate > 0");
            break;
        case NodeKind::point:
            break;
        case NodeKind::neg: {
            if (e.children.size() != 1) domain_fail(e, "neg takes exactly one child");
            validate(e.children[0]);
            // Lower end of a point child may sit exactly at 0.
            if (support_lower(e.children[0]) < 0.0) {
                throw ParseError(ParseErrorKind::bad_support, e.span,
                                 "neg requires a child supported on [0, inf)");
            }
            break;
        }
        case NodeKind::shift:
            if (e.children.size() != 1) domain_fail(e, "shift takes exactly one child");
            validate(e.children[0]);
            break;
        case NodeKind::mix: {
            if (e.children.empty() || e.children.size() != e.weights.size()) {
                domain_fail(e, "mix needs one weight per child");
            }
            double sum = 0.0;
            for (double w : e.weights) {
                if (!(w > 0)) {
                    throw ParseError(ParseErrorKind::bad_weights, e.span,
                                     "mixture weights must be strictly positive");
                }
                sum += w;
            }
            if (std::abs(sum - 1.0) > 1e-12) {
                throw ParseError(ParseErrorKind::bad_weights, e.span,
                                 "mixture weights sum to " + format_real(sum) + ", not 1");
            }
            for (const auto& c : e.children) validate(c);
            break;
        }
    }
}

DistExpr parse_spec(std::string_view text) { return Parser(text).parse_top(); }

std::string format_spec(const DistExpr& expr) {
    std::ostringstream out;
    format_into(expr, out);
    return out.str();
}

namespace {
DistExpr leaf(NodeKind kind, std::initializer_list<double> values) {
    const KindInfo& ki = info(kind);
    DistExpr e;
    e.kind = kind;
    int i = 0;
    for (double v : values) e.params.emplace_back(std::string(ki.params[i++]), v);
    return e;
}
}  // namespace

DistExpr pareto(double alpha, double kappa) { return leaf(NodeKind::pareto, {alpha, kappa}); }
DistExpr lognormal(double mu, double sigma) { return leaf(NodeKind::lognormal, {mu, sigma}); }
DistExpr weibull(double shape, double scale) { return leaf(NodeKind::weibull, {shape, scale}); }
DistExpr exponential(double rate) { return leaf(NodeKind::exponential, {rate}); }
DistExpr point(double c) { return leaf(NodeKind::point, {c}); }

DistExpr neg(DistExpr child) {
    DistExpr e;
    e.kind = NodeKind::neg;
    e.children.push_back(std::move(child));
    return e;
}

DistExpr shift(double c, DistExpr child) {
    DistExpr e = leaf(NodeKind::shift, {c});
    e.children.push_back(std::move(child));
    return e;
}

DistExpr mix(std::vector<std::pair<double, DistExpr>> parts) {
    DistExpr e;
    e.kind = NodeKind::mix;
    for (auto& [w, c] : parts) {
        e.weights.push_back(w);
        e.children.push_back(std::move(c));
    }
    return e;
}

}  // namespace htwk::distspec

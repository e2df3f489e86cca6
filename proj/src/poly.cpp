#include "lab/poly.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include "lab/errors.hpp"

namespace lab {

namespace {

double ipow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

int total_degree(const Term& t) { return std::accumulate(t.exps.begin(), t.exps.end(), 0); }

// Descending graded-lexicographic order.
bool term_before(const Term& a, const Term& b) {
    int da = total_degree(a), db = total_degree(b);
    if (da != db) return da > db;
    return a.exps > b.exps;
}

// Shortest decimal form of v that parses back to exactly v.
std::string format_double(double v) {
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace

Polynomial::Polynomial(int nvars) : nvars_(nvars) {
    if (nvars < 1) throw DimensionMismatch("polynomial needs nvars >= 1");
}

Polynomial::Polynomial(int nvars, std::vector<Term> terms) : nvars_(nvars), terms_(std::move(terms)) {
    if (nvars < 1) throw DimensionMismatch("polynomial needs nvars >= 1");
    for (const Term& t : terms_) {
        if (static_cast<int>(t.exps.size()) != nvars_ + 1)
            throw DimensionMismatch("term exponent tuple has wrong length");
    }
    normalize();
}

void Polynomial::normalize() {
    std::sort(terms_.begin(), terms_.end(), term_before);
    std::vector<Term> merged;
    for (Term& t : terms_) {
        if (!merged.empty() && merged.back().exps == t.exps)
            merged.back().coef += t.coef;
        else
            merged.push_back(std::move(t));
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const Term& t) { return t.coef == 0.0; }),
                 merged.end());
    terms_ = std::move(merged);
}

int Polynomial::degree() const {
    int d = 0;
    for (const Term& t : terms_) d = std::max(d, total_degree(t));
    return d;
}

bool Polynomial::depends_on_t() const {
    for (const Term& t : terms_)
        if (t.exps[nvars_] != 0) return true;
    return false;
}

double Polynomial::eval(const Eigen::VectorXd& x, double t) const {
    if (x.size() != nvars_) throw DimensionMismatch("point dimension does not match nvars");
    double acc = 0.0;
    for (const Term& term : terms_) {
        double m = term.coef;
        for (int i = 0; i < nvars_; ++i) m *= ipow(x[i], term.exps[i]);
        m *= ipow(t, term.exps[nvars_]);
        acc += m;
    }
    return acc;
}

double Polynomial::eval_with_scale(const Eigen::VectorXd& x, double t, double* scale) const {
    if (x.size() != nvars_) throw DimensionMismatch("point dimension does not match nvars");
    double acc = 0.0, mag = 0.0;
    for (const Term& term : terms_) {
        double m = term.coef;
        for (int i = 0; i < nvars_; ++i) m *= ipow(x[i], term.exps[i]);
        m *= ipow(t, term.exps[nvars_]);
        acc += m;
        mag += std::abs(m);
    }
    if (scale) *scale = mag;
    return acc;
}

Polynomial Polynomial::derivative(int var) const {
    if (var < 0 || var > nvars_) throw DimensionMismatch("derivative variable out of range");
    std::vector<Term> out;
    for (const Term& t : terms_) {
        int e = t.exps[var];
        if (e == 0) continue;
        Term d = t;
        d.coef *= e;
        d.exps[var] = e - 1;
        out.push_back(std::move(d));
    }
    return Polynomial(nvars_, std::move(out));
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
    if (nvars_ != other.nvars_) throw DimensionMismatch("polynomial nvars mismatch");
    std::vector<Term> out = terms_;
    out.insert(out.end(), other.terms_.begin(), other.terms_.end());
    return Polynomial(nvars_, std::move(out));
}

Polynomial Polynomial::operator-(const Polynomial& other) const { return *this + other.scaled(-1.0); }

Polynomial Polynomial::operator*(const Polynomial& other) const {
    if (nvars_ != other.nvars_) throw DimensionMismatch("polynomial nvars mismatch");
    std::vector<Term> out;
    out.reserve(terms_.size() * other.terms_.size());
    for (const Term& a : terms_) {
        for (const Term& b : other.terms_) {
            Term p;
            p.coef = a.coef * b.coef;
            p.exps.resize(nvars_ + 1);
            for (int i = 0; i <= nvars_; ++i) p.exps[i] = a.exps[i] + b.exps[i];
            out.push_back(std::move(p));
        }
    }
    return Polynomial(nvars_, std::move(out));
}

Polynomial Polynomial::scaled(double factor) const {
    std::vector<Term> out = terms_;
    for (Term& t : out) t.coef *= factor;
    return Polynomial(nvars_, std::move(out));
}

bool Polynomial::operator==(const Polynomial& other) const {
    if (nvars_ != other.nvars_ || terms_.size() != other.terms_.size()) return false;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (terms_[i].coef != other.terms_[i].coef || terms_[i].exps != other.terms_[i].exps)
            return false;
    }
    return true;
}

std::string Polynomial::str() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        const Term& t = terms_[k];
        double c = t.coef;
        if (k == 0) {
            if (c < 0) out += "-";
        } else {
            out += (c < 0) ? " - " : " + ";
        }
        double a = std::abs(c);
        std::string mono;
        for (int i = 0; i <= nvars_; ++i) {
            if (t.exps[i] == 0) continue;
            if (!mono.empty()) mono += "*";
            mono += (i == nvars_) ? "t" : "x" + std::to_string(i + 1);
            if (t.exps[i] > 1) mono += "^" + std::to_string(t.exps[i]);
        }
        if (mono.empty()) {
            out += format_double(a);
        } else if (a == 1.0) {
            out += mono;
        } else {
            out += format_double(a) + "*" + mono;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over
//   expr   := ['+'|'-'] term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := primary ['^' uint]
//   primary:= number | variable | '(' expr ')'

namespace {

struct Lexer {
    const std::string& text;
    std::size_t pos = 0;

    explicit Lexer(const std::string& s) : text(s) {}

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
};

class Parser {
public:
    Parser(const std::string& text, int nvars) : lex_(text), nvars_(nvars) {}

    Polynomial run() {
        Polynomial p = expr();
        lex_.skip_ws();
        if (lex_.pos != lex_.text.size())
            throw ParseError("unexpected trailing input", lex_.pos);
        return p;
    }

private:
    Polynomial expr() {
        double sign = 1.0;
        char c = lex_.peek();
        if (c == '+' || c == '-') {
            ++lex_.pos;
            if (c == '-') sign = -1.0;
        }
        Polynomial acc = term().scaled(sign);
        for (;;) {
            c = lex_.peek();
            if (c == '+' || c == '-') {
                ++lex_.pos;
                Polynomial rhs = term();
                acc = (c == '+') ? acc + rhs : acc - rhs;
            } else {
                return acc;
            }
        }
    }

    Polynomial term() {
        Polynomial acc = factor();
        while (lex_.peek() == '*') {
            ++lex_.pos;
            acc = acc * factor();
        }
        return acc;
    }

    Polynomial factor() {
        Polynomial base = primary();
        if (lex_.peek() == '^') {
            ++lex_.pos;
            int e = exponent_literal();
            Polynomial acc = constant(1.0);
            for (int i = 0; i < e; ++i) acc = acc * base;
            return acc;
        }
        return base;
    }

    Polynomial primary() {
        char c = lex_.peek();
        std::size_t at = lex_.pos;
        if (c == '(') {
            ++lex_.pos;
            Polynomial p = expr();
            if (lex_.peek() != ')') throw ParseError("expected ')'", lex_.pos);
            ++lex_.pos;
            return p;
        }
        if (c == 'x' || c == 't') return variable();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return constant(number_literal());
        throw ParseError("expected number, variable or '('", at);
    }

    Polynomial variable() {
        std::size_t at = lex_.pos;
        char c = lex_.text[lex_.pos++];
        int var;
        if (c == 't') {
            var = nvars_;
        } else {
            std::size_t start = lex_.pos;
            while (lex_.pos < lex_.text.size() &&
                   std::isdigit(static_cast<unsigned char>(lex_.text[lex_.pos])))
                ++lex_.pos;
            if (lex_.pos == start) throw ParseError("expected variable index after 'x'", at);
            long idx = std::strtol(lex_.text.substr(start, lex_.pos - start).c_str(), nullptr, 10);
            if (idx < 1 || idx > nvars_)
                throw ParseError("variable index out of range: x" + std::to_string(idx), at);
            var = static_cast<int>(idx - 1);
        }
        Term t;
        t.coef = 1.0;
        t.exps.assign(nvars_ + 1, 0);
        t.exps[var] = 1;
        return Polynomial(nvars_, {t});
    }

    double number_literal() {
        lex_.skip_ws();
        std::size_t at = lex_.pos;
        const char* begin = lex_.text.c_str() + at;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) throw ParseError("expected numeric literal", at);
        lex_.pos = at + static_cast<std::size_t>(end - begin);
        return v;
    }

    int exponent_literal() {
        lex_.skip_ws();
        std::size_t at = lex_.pos;
        if (at >= lex_.text.size() || !std::isdigit(static_cast<unsigned char>(lex_.text[at])))
            throw ParseError("exponent must be a non-negative integer literal", at);
        std::size_t start = at;
        while (lex_.pos < lex_.text.size() &&
               std::isdigit(static_cast<unsigned char>(lex_.text[lex_.pos])))
            ++lex_.pos;
        return static_cast<int>(
            std::strtol(lex_.text.substr(start, lex_.pos - start).c_str(), nullptr, 10));
    }

    Polynomial constant(double v) {
        Term t;
        t.coef = v;
        t.exps.assign(nvars_ + 1, 0);
        return Polynomial(nvars_, {t});
    }

    Lexer lex_;
    int nvars_;
};

}  // namespace

Polynomial parse_polynomial(const std::string& text, int nvars) {
    if (nvars < 1) throw DimensionMismatch("parse_polynomial needs nvars >= 1");
    return Parser(text, nvars).run();
}

Polynomial substitute_linear(const Polynomial& p, const Eigen::MatrixXd& basis, int new_nvars) {
    if (p.depends_on_t()) throw DimensionMismatch("substitute_linear input must not depend on t");
    if (basis.rows() != p.nvars() || basis.cols() != new_nvars)
        throw DimensionMismatch("substitution matrix has wrong shape");

    std::vector<Polynomial> lin;  // x_i as polynomial in the new variables
    for (int i = 0; i < p.nvars(); ++i) {
        std::vector<Term> ts;
        for (int j = 0; j < new_nvars; ++j) {
            if (basis(i, j) == 0.0) continue;
            Term t;
            t.coef = basis(i, j);
            t.exps.assign(new_nvars + 1, 0);
            t.exps[j] = 1;
            ts.push_back(std::move(t));
        }
        lin.emplace_back(new_nvars, std::move(ts));
    }

    Polynomial acc(new_nvars);
    for (const Term& term : p.terms()) {
        Term c;
        c.coef = term.coef;
        c.exps.assign(new_nvars + 1, 0);
        Polynomial prod(new_nvars, {c});
        for (int i = 0; i < p.nvars(); ++i)
            for (int e = 0; e < term.exps[i]; ++e) prod = prod * lin[i];
        acc = acc + prod;
    }
    return acc;
}

std::vector<double> restrict_to_line(const Polynomial& p, const Eigen::VectorXd& d, double t_value) {
    if (d.size() != p.nvars()) throw DimensionMismatch("direction dimension mismatch");
    std::vector<double> coef(static_cast<std::size_t>(p.degree()) + 1, 0.0);
    for (const Term& term : p.terms()) {
        double c = term.coef;
        int deg = 0;
        for (int i = 0; i < p.nvars(); ++i) {
            c *= ipow(d[i], term.exps[i]);
            deg += term.exps[i];
        }
        c *= ipow(t_value, term.exps[p.nvars()]);
        coef[deg] += c;
    }
    while (coef.size() > 1 && coef.back() == 0.0) coef.pop_back();
    return coef;
}

}  // namespace lab

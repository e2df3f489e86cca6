#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lab {

// One monomial: coef * x1^e0 * ... * xn^e(n-1) * t^e(n).  The exponent
// vector always has nvars+1 slots; the last one belongs to the parameter t.
struct Term {
    double coef = 0.0;
    std::vector<int> exps;
};

// Sparse multivariate polynomial in x1..xn and t.  Terms are kept merged,
// zero-pruned and sorted in descending graded-lexicographic order, so equal
// polynomials compare equal term by term and printing is deterministic.
// Immutable after construction; evaluation is pure.
class Polynomial {
public:
    explicit Polynomial(int nvars);
    Polynomial(int nvars, std::vector<Term> terms);

    int nvars() const { return nvars_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const;
    bool depends_on_t() const;

    double eval(const Eigen::VectorXd& x, double t) const;
    // Also reports sum_k |coef_k * monomial_k|, the natural magnitude against
    // which a residual |F| must be judged in floating point.
    double eval_with_scale(const Eigen::VectorXd& x, double t, double* scale) const;

    Polynomial derivative(int var) const;  // var in [0, nvars]; nvars means d/dt

    Polynomial operator+(const Polynomial& other) const;
    Polynomial operator-(const Polynomial& other) const;
    Polynomial operator*(const Polynomial& other) const;
    Polynomial scaled(double factor) const;
    bool operator==(const Polynomial& other) const;

    std::string str() const;

private:
    void normalize();

    int nvars_;
    std::vector<Term> terms_;
};

// Parses the grammar: variables x1..xn and t, operators + - * ^ with ^ taking
// a non-negative integer literal, real literals in decimal or scientific
// notation, parentheses.  Throws ParseError with the byte position on syntax
// errors and on variable indices outside 1..nvars.
Polynomial parse_polynomial(const std::string& text, int nvars);

// p must not depend on t.  Substitutes x_i := sum_j basis(i, j) * y_j and
// returns a polynomial in new_nvars variables y (t slot unused).
Polynomial substitute_linear(const Polynomial& p, const Eigen::MatrixXd& basis, int new_nvars);

// Dense coefficients of s -> p(s*d, t_value), constant term first.
std::vector<double> restrict_to_line(const Polynomial& p, const Eigen::VectorXd& d, double t_value);

}  // namespace lab

#pragma once

#include <limits>
#include <vector>

#include "critlab/field.hpp"

namespace critlab {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

// Exponent pair (p, q) of L^{p,q}; p in (1, inf], q in [1, inf], plus (1, inf).
class LorentzIndex {
  public:
    LorentzIndex(double p, double q);

    double p() const noexcept { return p_; }
    double q() const noexcept { return q_; }
    // 1/p + 1/p' = 1, with p = inf -> 1 and p = 1 -> inf.
    double conjugate() const noexcept;
    double inv_p() const noexcept { return 1.0 / p_; }
    double inv_q() const noexcept { return 1.0 / q_; }

  private:
    double p_;
    double q_;
};

enum class Convention { double_star, single_star };

// Decreasing rearrangement f* of |f| as a step function on (0, support_length].
// Piece i covers (ends[i-1], ends[i]] with value values[i]; cumulative[i] is
// f**(ends[i]).
struct Rearrangement {
    double support_length = 0.0;
    std::vector<double> ends;
    std::vector<double> values;
    std::vector<double> cumulative;

    double total() const noexcept;  // integral of f*
    double fstar(double s) const;
    double fstarstar(double s) const;
};

struct MomentSet {
    double mass = 0.0;
    double energy = 0.0;
};

struct RatioReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

struct InterpolationReport {
    RatioReport bound;    // corrected constant
    double literal_ratio; // lhs over the product with the constant as printed
    double lambda;
};

Rearrangement rearrange(const Field& f);
double lorentz_norm(const Rearrangement& r, LorentzIndex idx, Convention c);
double lorentz_norm(const Field& f, LorentzIndex idx, Convention c);

double moment(const Field& f, double alpha);
MomentSet moments(const Field& f);

RatioReport check_holder(const Field& f, const Field& g, LorentzIndex idx_f,
                         LorentzIndex idx_g, LorentzIndex idx_prod);
RatioReport check_young(const Field& f, const Field& g, LorentzIndex idx_f,
                        LorentzIndex idx_g, LorentzIndex idx_conv);
InterpolationReport check_interpolation(const Field& f, double p1, double q1, double p2,
                                        double q2, double p, double q);
RatioReport check_gagliardo(const Field& f, double p, double q);

}  // namespace critlab

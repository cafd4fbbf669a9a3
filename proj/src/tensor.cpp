#include "rp/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rp {

namespace {

std::size_t ipow(int d, int k) {
    std::size_t r = 1;
    for (int i = 0; i < k; ++i) r *= static_cast<std::size_t>(d);
    return r;
}

void require_same_shape(const TruncatedTensor& a, const TruncatedTensor& b,
                        const char* op) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(op) + ": dimension/level mismatch (" +
                                    std::to_string(a.dim()) + "," + std::to_string(a.level()) +
                                    ") vs (" + std::to_string(b.dim()) + "," +
                                    std::to_string(b.level()) + ")");
}

void require_unit_scalar(const TruncatedTensor& a, const char* op) {
    if (!a.has_unit_scalar())
        throw std::domain_error(std::string(op) + ": zeroth level must be 1, got " +
                                std::to_string(a.scalar()));
}

// out += u (x) v as raw blocks
void outer_accumulate(std::span<const double> u, std::span<const double> v,
                      std::span<double> out) {
    const std::size_t nv = v.size();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double ui = u[i];
        if (ui == 0.0) continue;
        double* dst = out.data() + i * nv;
        for (std::size_t j = 0; j < nv; ++j) dst[j] += ui * v[j];
    }
}

}  // namespace

TruncatedTensor::TruncatedTensor(int dim, int level) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("TruncatedTensor: dim must be positive");
    if (level < 0) throw std::invalid_argument("TruncatedTensor: level must be >= 0");
    levels_.resize(static_cast<std::size_t>(level) + 1);
    for (int k = 0; k <= level; ++k) levels_[k].assign(ipow(dim, k), 0.0);
}

TruncatedTensor TruncatedTensor::unit(int dim, int level) {
    TruncatedTensor t(dim, level);
    t.levels_[0][0] = 1.0;
    return t;
}

std::size_t TruncatedTensor::level_size(int k) const {
    if (k < 0 || k > level())
        throw std::invalid_argument("TruncatedTensor: level " + std::to_string(k) +
                                    " out of range [0," + std::to_string(level()) + "]");
    return levels_[k].size();
}

std::span<const double> TruncatedTensor::at(int k) const {
    if (k < 0 || k > level())
        throw std::invalid_argument("TruncatedTensor: level " + std::to_string(k) +
                                    " out of range [0," + std::to_string(level()) + "]");
    return levels_[k];
}

std::span<double> TruncatedTensor::at(int k) {
    if (k < 0 || k > level())
        throw std::invalid_argument("TruncatedTensor: level " + std::to_string(k) +
                                    " out of range [0," + std::to_string(level()) + "]");
    return levels_[k];
}

bool TruncatedTensor::has_unit_scalar(double tol) const {
    return std::abs(scalar() - 1.0) <= tol;
}

bool TruncatedTensor::all_finite() const {
    for (const auto& lv : levels_)
        for (double x : lv)
            if (!std::isfinite(x)) return false;
    return true;
}

bool TruncatedTensor::same_shape(const TruncatedTensor& other) const noexcept {
    return dim_ == other.dim_ && levels_.size() == other.levels_.size();
}

TruncatedTensor otimes(const TruncatedTensor& a, const TruncatedTensor& b) {
    require_same_shape(a, b, "otimes");
    const int n = a.level();
    TruncatedTensor c(a.dim(), n);
    for (int k = 0; k <= n; ++k) {
        auto out = c.at(k);
        for (int i = 0; i <= k; ++i) outer_accumulate(a.at(i), b.at(k - i), out);
    }
    return c;
}

void otimes_in_place(TruncatedTensor& a, const TruncatedTensor& b) {
    require_same_shape(a, b, "otimes");
    const int n = a.level();
    const double b0 = b.scalar();
    // Descending levels: when level k is rebuilt, a^i for i <= k is still the
    // original operand.
    for (int k = n; k >= 0; --k) {
        auto out = a.at(k);
        if (b0 != 1.0)
            for (double& x : out) x *= b0;
        for (int i = 0; i < k; ++i) outer_accumulate(a.at(i), b.at(k - i), out);
    }
}

TruncatedTensor oplus(const TruncatedTensor& a, const TruncatedTensor& b) {
    require_same_shape(a, b, "oplus");
    require_unit_scalar(a, "oplus");
    require_unit_scalar(b, "oplus");
    TruncatedTensor c = a;
    for (int k = 1; k <= a.level(); ++k) {
        auto out = c.at(k);
        auto bk = b.at(k);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += bk[i];
    }
    c.scalar() = 1.0;
    return c;
}

TruncatedTensor unit_scale(double lambda, const TruncatedTensor& a) {
    require_unit_scalar(a, "unit_scale");
    TruncatedTensor c = a;
    for (int k = 1; k <= a.level(); ++k)
        for (double& x : c.at(k)) x *= lambda;
    c.scalar() = 1.0;
    return c;
}

TruncatedTensor group_inverse(const TruncatedTensor& a) {
    require_unit_scalar(a, "group_inverse");
    const int n = a.level();
    // u = 1 - a is nilpotent (zero scalar), so the geometric series stops at n.
    TruncatedTensor u = sub(TruncatedTensor::unit(a.dim(), n), a);
    TruncatedTensor inv = TruncatedTensor::unit(a.dim(), n);
    TruncatedTensor pw = TruncatedTensor::unit(a.dim(), n);
    for (int k = 1; k <= n; ++k) {
        otimes_in_place(pw, u);
        add_in_place(inv, pw);
    }
    return inv;
}

TruncatedTensor tensor_exp(const TruncatedTensor& x) {
    if (std::abs(x.scalar()) > 1e-12)
        throw std::domain_error("tensor_exp: scalar part must be 0");
    const int n = x.level();
    TruncatedTensor s = TruncatedTensor::unit(x.dim(), n);
    TruncatedTensor pw = TruncatedTensor::unit(x.dim(), n);
    double fact = 1.0;
    for (int k = 1; k <= n; ++k) {
        otimes_in_place(pw, x);
        fact *= k;
        TruncatedTensor term = scale(1.0 / fact, pw);
        add_in_place(s, term);
    }
    return s;
}

TruncatedTensor tensor_log(const TruncatedTensor& a) {
    require_unit_scalar(a, "tensor_log");
    const int n = a.level();
    TruncatedTensor u = sub(a, TruncatedTensor::unit(a.dim(), n));
    TruncatedTensor s(a.dim(), n);
    TruncatedTensor pw = TruncatedTensor::unit(a.dim(), n);
    double sign = 1.0;
    for (int k = 1; k <= n; ++k) {
        otimes_in_place(pw, u);
        TruncatedTensor term = scale(sign / k, pw);
        add_in_place(s, term);
        sign = -sign;
    }
    return s;
}

TruncatedTensor add(const TruncatedTensor& a, const TruncatedTensor& b) {
    require_same_shape(a, b, "add");
    TruncatedTensor c = a;
    add_in_place(c, b);
    return c;
}

TruncatedTensor sub(const TruncatedTensor& a, const TruncatedTensor& b) {
    require_same_shape(a, b, "sub");
    TruncatedTensor c = a;
    for (int k = 0; k <= a.level(); ++k) {
        auto out = c.at(k);
        auto bk = b.at(k);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bk[i];
    }
    return c;
}

TruncatedTensor scale(double lambda, const TruncatedTensor& a) {
    TruncatedTensor c = a;
    for (int k = 0; k <= a.level(); ++k)
        for (double& x : c.at(k)) x *= lambda;
    return c;
}

void add_in_place(TruncatedTensor& a, const TruncatedTensor& b) {
    require_same_shape(a, b, "add");
    for (int k = 0; k <= a.level(); ++k) {
        auto out = a.at(k);
        auto bk = b.at(k);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += bk[i];
    }
}

double level_norm(const TruncatedTensor& a, int k) {
    auto lv = a.at(k);  // range check happens here
    double s = 0.0;
    for (double x : lv) s += x * x;
    return std::sqrt(s);
}

double max_level_norm(const TruncatedTensor& a) {
    double m = 0.0;
    for (int k = 1; k <= a.level(); ++k) m = std::max(m, level_norm(a, k));
    return m;
}

TruncatedTensor truncate(const TruncatedTensor& a, int k) {
    if (k < 0 || k > a.level())
        throw std::invalid_argument("truncate: level " + std::to_string(k) +
                                    " out of range [0," + std::to_string(a.level()) + "]");
    TruncatedTensor c(a.dim(), k);
    for (int j = 0; j <= k; ++j) {
        auto out = c.at(j);
        auto in = a.at(j);
        std::copy(in.begin(), in.end(), out.begin());
    }
    return c;
}

TruncatedTensor zero_pad(const TruncatedTensor& a, int n) {
    if (n < a.level())
        throw std::invalid_argument("zero_pad: target level " + std::to_string(n) +
                                    " below current level " + std::to_string(a.level()));
    TruncatedTensor c(a.dim(), n);
    for (int j = 0; j <= a.level(); ++j) {
        auto out = c.at(j);
        auto in = a.at(j);
        std::copy(in.begin(), in.end(), out.begin());
    }
    return c;
}

bool approx_equal(const TruncatedTensor& a, const TruncatedTensor& b,
                  double rtol, double atol) {
    if (!a.same_shape(b)) return false;
    for (int k = 0; k <= a.level(); ++k) {
        auto ak = a.at(k);
        auto bk = b.at(k);
        double diff = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t i = 0; i < ak.size(); ++i) {
            const double d = ak[i] - bk[i];
            diff += d * d;
            na += ak[i] * ak[i];
            nb += bk[i] * bk[i];
        }
        if (std::sqrt(diff) > atol + rtol * std::sqrt(std::max(na, nb))) return false;
    }
    return true;
}

double max_diff_norm(const TruncatedTensor& a, const TruncatedTensor& b) {
    require_same_shape(a, b, "max_diff_norm");
    double m = 0.0;
    for (int k = 0; k <= a.level(); ++k) {
        auto ak = a.at(k);
        auto bk = b.at(k);
        double s = 0.0;
        for (std::size_t i = 0; i < ak.size(); ++i) {
            const double d = ak[i] - bk[i];
            s += d * d;
        }
        m = std::max(m, std::sqrt(s));
    }
    return m;
}

void defect_norms(const TruncatedTensor& a, const TruncatedTensor& b,
                  const TruncatedTensor& c, std::vector<double>& scratch,
                  std::span<double> out) {
    require_same_shape(a, b, "defect_norms");
    require_same_shape(a, c, "defect_norms");
    const int n = a.level();
    for (int k = 0; k <= n; ++k) {
        const std::size_t sz = c.level_size(k);
        scratch.assign(sz, 0.0);
        std::span<double> acc(scratch.data(), sz);
        for (int i = 0; i <= k; ++i) outer_accumulate(a.at(i), b.at(k - i), acc);
        auto ck = c.at(k);
        double s = 0.0;
        for (std::size_t i = 0; i < sz; ++i) {
            const double d = acc[i] - ck[i];
            s += d * d;
        }
        out[k] = std::sqrt(s);
    }
}

}  // namespace rp

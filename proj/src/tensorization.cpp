#include "intrinsic/tensorization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace intrinsic {

// ---------------------------------------------------------------- ConcavePhi

ConcavePhi::ConcavePhi(std::vector<double> breakpoints, std::vector<double> values) {
    if (breakpoints.size() != values.size() || breakpoints.empty())
        throw std::invalid_argument("ConcavePhi: breakpoint/value mismatch");
    xs_ = {0.0};
    ys_ = {0.0};
    for (std::size_t k = 0; k < breakpoints.size(); ++k) {
        if (!(breakpoints[k] > xs_.back()))
            throw std::invalid_argument("ConcavePhi: breakpoints must be positive and increasing");
        xs_.push_back(breakpoints[k]);
        ys_.push_back(values[k]);
    }
}

double ConcavePhi::operator()(double e) const {
    if (e < 0.0) throw std::domain_error("ConcavePhi: negative argument");
    if (xs_.size() == 1) return 0.0;
    if (e >= xs_.back()) {
        std::size_t k = xs_.size() - 1;
        double slope = (ys_[k] - ys_[k - 1]) / (xs_[k] - xs_[k - 1]);
        return ys_[k] + slope * (e - xs_[k]);
    }
    auto it = std::upper_bound(xs_.begin(), xs_.end(), e);
    std::size_t k = static_cast<std::size_t>(it - xs_.begin());
    double t = (e - xs_[k - 1]) / (xs_[k] - xs_[k - 1]);
    return ys_[k - 1] + t * (ys_[k] - ys_[k - 1]);
}

std::vector<double> ConcavePhi::slopes() const {
    std::vector<double> s;
    for (std::size_t k = 1; k < xs_.size(); ++k)
        s.push_back((ys_[k] - ys_[k - 1]) / (xs_[k] - xs_[k - 1]));
    return s;
}

bool ConcavePhi::is_concave(double tol) const {
    auto s = slopes();
    for (std::size_t k = 1; k < s.size(); ++k)
        if (s[k] > s[k - 1] + tol * std::max(1.0, std::abs(s[k - 1]))) return false;
    return true;
}

// ---------------------------------------------------------------- calibration

TwoPointSample two_point_sample(double f0, double f1, double p, const std::vector<double>& w,
                                double c_conv) {
    const double l0 = std::log(f0), l1 = std::log(f1);
    // Work with f^p scaled by its maximum to keep exponentials bounded.
    const double lmax = std::max(l0, l1);
    const double a0 = std::exp(p * (l0 - lmax)), a1 = std::exp(p * (l1 - lmax));
    const double mean = w[0] * a0 + w[1] * a1;
    const double ent = w[0] * a0 * p * (l0 - lmax) + w[1] * a1 * p * (l1 - lmax) -
                       mean * std::log(mean);
    double energy;
    if (p == 1.0) {
        energy = c_conv * c_conv * (a0 - a1) * (l0 - l1);
    } else {
        // (f0 − f1)(f0^{p−1} − f1^{p−1}) scaled by e^{p·lmax}.
        double b0 = std::exp(l0 - lmax), b1 = std::exp(l1 - lmax);
        double c0 = std::exp((p - 1.0) * (l0 - lmax)), c1 = std::exp((p - 1.0) * (l1 - lmax));
        energy = c_conv * c_conv * (b0 - b1) * (c0 - c1);
    }
    return {energy / mean, std::max(0.0, ent / mean)};
}

namespace {

struct Pt {
    double e, h;
};

std::vector<Pt> upper_hull(std::vector<Pt> pts) {
    pts.push_back({0.0, 0.0});
    std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
        return a.e < b.e || (a.e == b.e && a.h > b.h);
    });
    std::vector<Pt> hull;
    for (const Pt& p : pts) {
        if (!hull.empty() && p.e == hull.back().e) continue;
        while (hull.size() >= 2) {
            const Pt& a = hull[hull.size() - 2];
            const Pt& b = hull.back();
            double cross = (b.e - a.e) * (p.h - a.h) - (b.h - a.h) * (p.e - a.e);
            if (cross >= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(p);
    }
    // The hull must start at the origin; drop anything left of it.
    while (hull.size() > 1 && hull.front().e < 0.0) hull.erase(hull.begin());
    return hull;
}

double hull_eval(const std::vector<Pt>& hull, double e) {
    if (e >= hull.back().e) {
        std::size_t k = hull.size() - 1;
        if (k == 0) return hull[0].h;
        double s = (hull[k].h - hull[k - 1].h) / (hull[k].e - hull[k - 1].e);
        return hull[k].h + s * (e - hull[k].e);
    }
    auto it = std::upper_bound(hull.begin(), hull.end(), e, [](double v, const Pt& p) { return v < p.e; });
    std::size_t k = static_cast<std::size_t>(it - hull.begin());
    if (k == 0) return 0.0;
    double t = (e - hull[k - 1].e) / (hull[k].e - hull[k - 1].e);
    return hull[k - 1].h + t * (hull[k].h - hull[k - 1].h);
}

}  // namespace

ConcavePhi calibrate_phi(double p, const DiscreteProductSpace& base, int resolution, double c_conv) {
    if (base.factors() != 1 || base.base_size() != 2)
        throw std::invalid_argument("calibrate_phi: base must be a single two-point factor");
    if (!(p >= 1.0)) throw std::invalid_argument("calibrate_phi: p must be ≥ 1");
    const double L = 30.0;
    const auto& w = base.base_weights();
    std::vector<double> us;
    for (int j = 0; j < resolution; ++j) us.push_back(-L + 2.0 * L * j / (resolution - 1));
    auto sample = [&](double u) {
        TwoPointSample s = two_point_sample(1.0, std::exp(u), p, w, c_conv);
        return Pt{s.energy, s.entropy};
    };
    std::vector<Pt> pts;
    for (double u : us) pts.push_back(sample(u));
    std::vector<Pt> hull = upper_hull(pts);
    // Refine the sweep wherever the curve between two samples rises above the hull.
    for (int pass = 0; pass < 40; ++pass) {
        std::vector<double> added;
        for (std::size_t j = 0; j + 1 < us.size(); ++j) {
            double um = 0.5 * (us[j] + us[j + 1]);
            Pt q = sample(um);
            if (q.h - hull_eval(hull, q.e) > 1e-13) added.push_back(um);
        }
        if (added.empty()) break;
        for (double u : added) pts.push_back(sample(u));
        us.insert(us.end(), added.begin(), added.end());
        std::sort(us.begin(), us.end());
        hull = upper_hull(pts);
    }
    std::vector<double> xs, ys;
    for (std::size_t k = 1; k < hull.size(); ++k) {
        xs.push_back(hull[k].e);
        ys.push_back(hull[k].h);
    }
    if (xs.empty()) return ConcavePhi();
    return ConcavePhi(xs, ys);
}

// ---------------------------------------------------------------- tensorized bound

std::vector<double> companion_power(const std::vector<double>& f, double p) {
    std::vector<double> g(f.size());
    for (std::size_t s = 0; s < f.size(); ++s)
        g[s] = p == 1.0 ? std::log(f[s]) : std::pow(f[s], p - 1.0);
    return g;
}

namespace {

/// Chunked sum with fixed chunk boundaries, combined in index order.
double chunked_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
    const std::size_t chunk = 1 << 14;
    const std::size_t nchunks = (n + chunk - 1) / chunk;
    std::vector<double> partial(nchunks, 0.0);
    parallel_chunks(nchunks, 1, [&](std::size_t c0, std::size_t c1) {
        for (std::size_t c = c0; c < c1; ++c) {
            std::vector<double> t;
            t.reserve(chunk);
            for (std::size_t s = c * chunk; s < std::min(n, (c + 1) * chunk); ++s) t.push_back(term(s));
            partial[c] = ordered_sum(t);
        }
    });
    return ordered_sum(partial);
}

std::vector<double> state_probabilities(const DiscreteProductSpace& space) {
    std::vector<double> pr(space.states());
    for (std::size_t s = 0; s < space.states(); ++s) pr[s] = space.probability(s);
    return pr;
}

}  // namespace

TensorizedBound tensorized_bound(const std::vector<double>& f, const ConcavePhi& phi, double p,
                                 const DiscreteProductSpace& space, double c_conv) {
    if (f.size() != space.states()) throw std::invalid_argument("tensorized_bound: size mismatch");
    if (space.base_size() != 2)
        throw std::invalid_argument("tensorized_bound: two-point factors required");
    for (double v : f)
        if (!(v > 0.0)) throw std::invalid_argument("tensorized_bound: f must be positive");
    const auto pr = state_probabilities(space);
    const std::size_t N = space.states();
    std::vector<double> fp(N);
    for (std::size_t s = 0; s < N; ++s) fp[s] = std::pow(f[s], p);
    const double mean = chunked_sum(N, [&](std::size_t s) { return pr[s] * fp[s]; });
    const double flog = chunked_sum(N, [&](std::size_t s) { return pr[s] * fp[s] * p * std::log(f[s]); });
    TensorizedBound r;
    r.lhs = std::max(0.0, flog - mean * std::log(mean));
    const auto g = companion_power(f, p);
    const int n = space.factors();
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const std::size_t stride = space.stride(i);
        double e = chunked_sum(N, [&](std::size_t s) {
            std::size_t t = space.digit(s, i) == 0 ? s + stride : s - stride;
            return pr[s] * (f[s] - f[t]) * (g[s] - g[t]);
        });
        e *= c_conv * c_conv;
        r.coordinate_energy.push_back(e);
        total += e;
        r.rhs_intrinsic += phi(e / mean);
        r.extrapolated = r.extrapolated || phi.extrapolates(e / mean);
    }
    r.rhs_intrinsic *= mean;
    r.rhs_ps = n * mean * phi(total / (n * mean));
    r.extrapolated = r.extrapolated || phi.extrapolates(total / (n * mean));
    return r;
}

// ---------------------------------------------------------------- general tensorization

SubProductFunction full_function(const std::vector<double>& f, const DiscreteProductSpace& space) {
    SubProductFunction g;
    for (int i = 0; i < space.factors(); ++i) g.coords.push_back(i);
    g.values = f;
    return g;
}

SubProductFunction restriction(const std::vector<double>& f, const DiscreteProductSpace& space,
                               int i, std::size_t s) {
    SubProductFunction g;
    g.coords = {i};
    for (int d = 0; d < space.base_size(); ++d) g.values.push_back(f[space.with_digit(s, i, d)]);
    return g;
}

namespace {

double sub_probability(const SubProductFunction& g, const DiscreteProductSpace& space, std::size_t s) {
    const auto k = static_cast<std::size_t>(space.base_size());
    double p = 1.0;
    for (std::size_t c = 0; c < g.coords.size(); ++c) {
        p *= space.base_weights()[s % k];
        s /= k;
    }
    return p;
}

}  // namespace

double subproduct_mean(const SubProductFunction& g, const DiscreteProductSpace& space,
                       const std::function<double(double)>& transform) {
    std::vector<double> t(g.values.size());
    for (std::size_t s = 0; s < g.values.size(); ++s)
        t[s] = sub_probability(g, space, s) * transform(g.values[s]);
    return ordered_sum(t);
}

double subproduct_dirichlet(const SubProductFunction& g, int i, const DiscreteProductSpace& space,
                            double p, double c_conv) {
    auto pos_it = std::find(g.coords.begin(), g.coords.end(), i);
    if (pos_it == g.coords.end()) return 0.0;
    if (space.base_size() != 2)
        throw std::invalid_argument("subproduct_dirichlet: two-point factors required");
    std::size_t stride = 1;
    for (auto it = g.coords.begin(); it != pos_it; ++it) stride *= 2;
    auto comp = [p](double v) { return p == 1.0 ? std::log(v) : std::pow(v, p - 1.0); };
    std::vector<double> t(g.values.size());
    for (std::size_t s = 0; s < g.values.size(); ++s) {
        std::size_t u = (s / stride) % 2 == 0 ? s + stride : s - stride;
        t[s] = sub_probability(g, space, s) * (g.values[s] - g.values[u]) *
               (comp(g.values[s]) - comp(g.values[u]));
    }
    return c_conv * c_conv * ordered_sum(t);
}

Subadditivity subadditivity_check(const std::vector<double>& f, const DiscreteProductSpace& space) {
    const auto pr = state_probabilities(space);
    Subadditivity r;
    r.entropy = entropy_functional(f, pr).value;
    const auto& w = space.base_weights();
    for (int i = 0; i < space.factors(); ++i) {
        std::vector<double> terms;
        for (std::size_t s = 0; s < space.states(); ++s) {
            if (space.digit(s, i) != 0) continue;
            SubProductFunction g = restriction(f, space, i, s);
            double marginal = pr[s] / w[0];
            terms.push_back(marginal * entropy_functional(g.values, w).value);
        }
        r.sum_conditional += ordered_sum(terms);
    }
    return r;
}

GeneralTensorizeResult general_tensorize(const std::vector<double>& f,
                                         const std::vector<FunctionalPair>& pairs,
                                         const ConcavePhi& phi, const DiscreteProductSpace& space) {
    const int n = space.factors();
    if (static_cast<int>(pairs.size()) != n)
        throw std::invalid_argument("general_tensorize: one functional pair per coordinate required");
    if (f.size() != space.states()) throw std::invalid_argument("general_tensorize: size mismatch");
    for (double v : f)
        if (!(v > 0.0)) throw std::invalid_argument("general_tensorize: f must be positive");
    const auto pr = state_probabilities(space);
    const auto& w = space.base_weights();
    GeneralTensorizeResult r;
    r.lhs = entropy_functional(f, pr).value;
    SubProductFunction full = full_function(f, space);
    std::vector<double> b(f.size());
    for (std::size_t s = 0; s < f.size(); ++s) b[s] = pr[s] * f[s];
    const double mean = ordered_sum(b);
    for (int i = 0; i < n; ++i) {
        std::vector<double> qs, ms;
        for (std::size_t s = 0; s < space.states(); ++s) {
            if (space.digit(s, i) != 0) continue;
            SubProductFunction g = restriction(f, space, i, s);
            double marginal = pr[s] / w[0];
            double q = pairs[i].Q(g, i), m = pairs[i].M(g, i);
            qs.push_back(marginal * q);
            ms.push_back(marginal * m);
            double eg = subproduct_mean(g, space, [](double v) { return v; });
            double ent = entropy_functional(g.values, w).value;
            double bound = q + eg * phi(std::max(0.0, (m - q) / eg));
            if (m - q < -1e-12) bound = -std::numeric_limits<double>::infinity();
            r.assumption_worst = std::max(r.assumption_worst, ent - bound);
        }
        double q_full = pairs[i].Q(full, i), m_full = pairs[i].M(full, i);
        double dq = std::abs(ordered_sum(qs) - q_full), dm = std::abs(ordered_sum(ms) - m_full);
        r.disintegration_defect = std::max({r.disintegration_defect, dq, dm});
        r.rhs += q_full + mean * phi(std::max(0.0, (m_full - q_full) / mean));
    }
    if (r.disintegration_defect > 1e-10)
        throw std::runtime_error("general_tensorize: functional pair does not disintegrate (defect " +
                                 std::to_string(r.disintegration_defect) + ")");
    r.assumption_holds = r.assumption_worst <= 1e-12;
    return r;
}

}  // namespace intrinsic

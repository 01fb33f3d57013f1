#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace scdepth {

class Tape;

/// Scalar tracked by the active tape. 16 bytes; constants carry no node.
struct Var {
    double v = 0.0;
    uint32_t idx = kConst;

    static constexpr uint32_t kConst = 0xffffffffu;

    Var() = default;
    Var(double value) : v(value) {}  // implicit: constants enter expressions freely
    Var(double value, uint32_t i) : v(value), idx(i) {}

    bool is_const() const { return idx == kConst; }
};

inline double value_of(const Var& x) { return x.v; }

/// Reverse-mode tape over scalar operations. Each node stores up to two
/// parents with local partial derivatives; gradient() runs one backward
/// sweep seeded at an output node.
class Tape {
public:
    struct Node {
        double w0, w1;
        uint32_t p0, p1;
    };

    Tape() { nodes_.reserve(1 << 16); }

    Var variable(double value) {
        nodes_.push_back({0.0, 0.0, Var::kConst, Var::kConst});
        return Var(value, uint32_t(nodes_.size() - 1));
    }

    uint32_t unary(uint32_t p, double w) {
        nodes_.push_back({w, 0.0, p, Var::kConst});
        return uint32_t(nodes_.size() - 1);
    }

    uint32_t binary(uint32_t p0, double w0, uint32_t p1, double w1) {
        nodes_.push_back({w0, w1, p0, p1});
        return uint32_t(nodes_.size() - 1);
    }

    size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

    /// Adjoints of every node w.r.t. the output. Index with Var::idx.
    std::vector<double> gradient(const Var& output) const {
        std::vector<double> adj(nodes_.size(), 0.0);
        if (output.is_const()) return adj;
        adj[output.idx] = 1.0;
        for (size_t i = nodes_.size(); i-- > 0;) {
            double a = adj[i];
            if (a == 0.0) continue;
            const Node& n = nodes_[i];
            if (n.p0 != Var::kConst) adj[n.p0] += n.w0 * a;
            if (n.p1 != Var::kConst) adj[n.p1] += n.w1 * a;
        }
        return adj;
    }

    static Tape* active() { return active_; }
    static void set_active(Tape* t) { active_ = t; }

    /// RAII activation; the tape records all Var arithmetic in scope.
    class Scope {
    public:
        explicit Scope(Tape& t) : prev_(active_) { active_ = &t; }
        ~Scope() { active_ = prev_; }
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;

    private:
        Tape* prev_;
    };

private:
    static thread_local Tape* active_;
    std::vector<Node> nodes_;
};

inline thread_local Tape* Tape::active_ = nullptr;

namespace detail {
inline Var make(double v, uint32_t idx) { return Var(v, idx); }

inline Var record_unary(double v, const Var& x, double dx) {
    if (x.is_const()) return Var(v);
    return Var(v, Tape::active()->unary(x.idx, dx));
}

inline Var record_binary(double v, const Var& a, double da, const Var& b, double db) {
    if (a.is_const() && b.is_const()) return Var(v);
    if (a.is_const()) return Var(v, Tape::active()->unary(b.idx, db));
    if (b.is_const()) return Var(v, Tape::active()->unary(a.idx, da));
    return Var(v, Tape::active()->binary(a.idx, da, b.idx, db));
}
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
    return detail::record_binary(a.v + b.v, a, 1.0, b, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
    return detail::record_binary(a.v - b.v, a, 1.0, b, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
    return detail::record_binary(a.v * b.v, a, b.v, b, a.v);
}
inline Var operator/(const Var& a, const Var& b) {
    double inv = 1.0 / b.v;
    return detail::record_binary(a.v * inv, a, inv, b, -a.v * inv * inv);
}
inline Var operator-(const Var& a) { return detail::record_unary(-a.v, a, -1.0); }
inline Var operator+(const Var& a) { return a; }

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }
inline Var& operator/=(Var& a, const Var& b) { return a = a / b; }

inline bool operator<(const Var& a, const Var& b) { return a.v < b.v; }
inline bool operator>(const Var& a, const Var& b) { return a.v > b.v; }
inline bool operator<=(const Var& a, const Var& b) { return a.v <= b.v; }
inline bool operator>=(const Var& a, const Var& b) { return a.v >= b.v; }

inline Var exp(const Var& x) {
    double e = std::exp(x.v);
    return detail::record_unary(e, x, e);
}
inline Var log(const Var& x) { return detail::record_unary(std::log(x.v), x, 1.0 / x.v); }
inline Var sqrt(const Var& x) {
    double s = std::sqrt(x.v);
    return detail::record_unary(s, x, 0.5 / s);
}
inline Var sin(const Var& x) { return detail::record_unary(std::sin(x.v), x, std::cos(x.v)); }
inline Var cos(const Var& x) { return detail::record_unary(std::cos(x.v), x, -std::sin(x.v)); }

/// |x| with left-cell subgradient sign(x); d|0| taken as 0.
inline Var abs(const Var& x) {
    double s = x.v > 0 ? 1.0 : (x.v < 0 ? -1.0 : 0.0);
    return detail::record_unary(std::abs(x.v), x, s);
}
inline Var fabs(const Var& x) { return abs(x); }

inline Var min(const Var& a, const Var& b) { return a.v <= b.v ? a : b; }
inline Var max(const Var& a, const Var& b) { return a.v >= b.v ? a : b; }

/// log(1 + exp(t)) without overflow for large |t|.
inline double softplus(double t) {
    if (t > 35.0) return t;
    if (t < -35.0) return std::exp(t);
    return std::log1p(std::exp(t));
}
inline Var softplus(const Var& x) {
    double sig = 1.0 / (1.0 + std::exp(-x.v));
    return detail::record_unary(softplus(x.v), x, sig);
}

}  // namespace scdepth

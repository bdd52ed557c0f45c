#include "sdft/tensor.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace sdft {

namespace {

int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
}

thread_local Tape* g_current_tape = nullptr;

}  // namespace

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) os << "x";
        os << s[i];
    }
    os << "]";
    return os.str();
}

// ---- Tensor ----------------------------------------------------------------

Tensor Tensor::zeros(Shape shape) {
    auto d = std::make_shared<Data>();
    const int64_t n = shape_numel(shape);
    if (n < 0) throw ParameterError("tensor shape " + shape_str(shape) + " has a negative dimension");
    d->shape = std::move(shape);
    d->v.assign(static_cast<size_t>(n), 0.0);
    return Tensor(std::move(d));
}

Tensor Tensor::full(Shape shape, double value) {
    Tensor t = zeros(std::move(shape));
    for (double& x : t.d_->v) x = value;
    return t;
}

Tensor Tensor::scalar(double value) { return full({1}, value); }

Tensor Tensor::from(Shape shape, std::vector<double> values) {
    const int64_t n = shape_numel(shape);
    if (n != static_cast<int64_t>(values.size())) {
        throw DimensionError("value count " + std::to_string(values.size()) +
                             " does not match shape " + shape_str(shape));
    }
    auto d = std::make_shared<Data>();
    d->shape = std::move(shape);
    d->v = std::move(values);
    return Tensor(std::move(d));
}

const Shape& Tensor::shape() const {
    if (!d_) throw ContractError("use of an undefined tensor");
    return d_->shape;
}

int64_t Tensor::size() const {
    if (!d_) throw ContractError("use of an undefined tensor");
    return static_cast<int64_t>(d_->v.size());
}

int64_t Tensor::rows() const {
    if (shape().size() != 2) throw DimensionError("rows() on non-matrix tensor " + shape_str(shape()));
    return d_->shape[0];
}

int64_t Tensor::cols() const {
    if (shape().size() != 2) throw DimensionError("cols() on non-matrix tensor " + shape_str(shape()));
    return d_->shape[1];
}

std::span<const double> Tensor::values() const {
    if (!d_) throw ContractError("use of an undefined tensor");
    return d_->v;
}

std::span<double> Tensor::mutable_values() {
    if (!d_) throw ContractError("use of an undefined tensor");
    return d_->v;
}

double Tensor::item() const {
    if (size() != 1) throw ContractError("item() on non-scalar tensor " + shape_str(shape()));
    return d_->v[0];
}

double Tensor::at(int64_t i) const { return values()[static_cast<size_t>(i)]; }

bool Tensor::requires_grad() const { return d_ && d_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool v) {
    if (!d_) throw ContractError("use of an undefined tensor");
    d_->requires_grad = v;
    return *this;
}

bool Tensor::has_grad() const { return d_ && !d_->g.empty(); }

std::span<const double> Tensor::grad() const {
    if (!has_grad()) throw ContractError("tensor has no gradient");
    return d_->g;
}

std::vector<double> Tensor::grad_or_zeros() const {
    if (has_grad()) return d_->g;
    return std::vector<double>(static_cast<size_t>(size()), 0.0);
}

void Tensor::zero_grad() {
    if (d_ && !d_->g.empty()) d_->g.assign(d_->g.size(), 0.0);
}

Tensor Tensor::detached_copy() const {
    if (!d_) return Tensor();
    auto d = std::make_shared<Data>();
    d->shape = d_->shape;
    d->v = d_->v;
    return Tensor(std::move(d));
}

bool Tensor::all_finite() const {
    for (double x : values()) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

// ---- Tape ------------------------------------------------------------------

Tape::Tape() : prev_(g_current_tape) { g_current_tape = this; }

Tape::~Tape() { g_current_tape = prev_; }

Tape* Tape::current() { return g_current_tape; }

void Tape::record(std::shared_ptr<Tensor::Data> out, std::function<void()> back) {
    nodes_.push_back(Node{std::move(out), std::move(back)});
}

namespace {

void ensure_grad(Tensor::Data& d) {
    if (d.g.size() != d.v.size()) d.g.assign(d.v.size(), 0.0);
}

}  // namespace

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1) {
        throw ContractError("backward requires a scalar loss, got " +
                            (loss.defined() ? shape_str(loss.shape()) : std::string("undefined")));
    }
    bool on_tape = false;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        if (it->out == loss.d_) {
            on_tape = true;
            break;
        }
    }
    if (!on_tape) throw ContractError("backward: loss tensor was not recorded on this tape");

    ensure_grad(*loss.d_);
    loss.d_->g[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->back();
}

// ---- op helpers -------------------------------------------------------------

struct TensorOps {
    static std::shared_ptr<Tensor::Data> data(const Tensor& t) { return t.d_; }

    static Tensor make(Shape shape, std::vector<double> v) {
        return Tensor::from(std::move(shape), std::move(v));
    }

    // Gradient of `out` as a span, or empty if never touched by the sweep.
    static std::span<const double> out_grad(const std::shared_ptr<Tensor::Data>& d) {
        return d->g;
    }

    static void accumulate(const std::shared_ptr<Tensor::Data>& d, size_t i, double x) {
        ensure_grad(*d);
        d->g[i] += x;
    }

    static std::vector<double>& grad_buffer(const std::shared_ptr<Tensor::Data>& d) {
        ensure_grad(*d);
        return d->g;
    }

    static void maybe_record(Tensor& out, std::initializer_list<const Tensor*> inputs,
                             std::function<void()> back) {
        Tape* tape = Tape::current();
        if (!tape) return;
        bool needs = false;
        for (const Tensor* t : inputs) needs = needs || t->requires_grad();
        if (!needs) return;
        out.set_requires_grad(true);
        tape->record(out.d_, std::move(back));
    }
};

namespace {

using Ops = TensorOps;

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
    }
}

}  // namespace

// ---- primitives -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.cols() != b.rows()) {
        throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    }
    const int64_t m = a.rows(), k = a.cols(), n = b.cols();
    std::vector<double> cv(static_cast<size_t>(m * n), 0.0);
    {
        const double* ap = a.values().data();
        const double* bp = b.values().data();
        double* cp = cv.data();
        for (int64_t i = 0; i < m; ++i) {
            const double* arow = ap + i * k;
            double* crow = cp + i * n;
            for (int64_t kk = 0; kk < k; ++kk) {
                const double av = arow[kk];
                const double* brow = bp + kk * n;
                for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    }
    Tensor c = Ops::make({m, n}, std::move(cv));

    auto ad = Ops::data(a), bd = Ops::data(b), cd = Ops::data(c);
    const bool agrad = a.requires_grad(), bgrad = b.requires_grad();
    Ops::maybe_record(c, {&a, &b}, [ad, bd, cd, m, k, n, agrad, bgrad]() {
        const std::span<const double> dc = Ops::out_grad(cd);
        if (dc.empty()) return;
        if (agrad) {
            // dA = dC · B^T
            std::vector<double>& da = Ops::grad_buffer(ad);
            const double* bp = bd->v.data();
            for (int64_t i = 0; i < m; ++i) {
                const double* dcrow = dc.data() + i * n;
                double* darow = da.data() + i * k;
                for (int64_t kk = 0; kk < k; ++kk) {
                    const double* brow = bp + kk * n;
                    double acc = 0.0;
                    for (int64_t j = 0; j < n; ++j) acc += dcrow[j] * brow[j];
                    darow[kk] += acc;
                }
            }
        }
        if (bgrad) {
            // dB = A^T · dC
            std::vector<double>& db = Ops::grad_buffer(bd);
            const double* ap = ad->v.data();
            for (int64_t kk = 0; kk < k; ++kk) {
                const double* arow = ap;  // column kk of A read with stride
                double* dbrow = db.data() + kk * n;
                for (int64_t i = 0; i < m; ++i) {
                    const double av = arow[i * k + kk];
                    const double* dcrow = dc.data() + i * n;
                    for (int64_t j = 0; j < n; ++j) dbrow[j] += av * dcrow[j];
                }
            }
        }
    });
    return c;
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape("add", a, b);
    std::vector<double> cv(a.values().begin(), a.values().end());
    const std::span<const double> bv = b.values();
    for (size_t i = 0; i < cv.size(); ++i) cv[i] += bv[i];
    Tensor c = Ops::make(a.shape(), std::move(cv));

    auto ad = Ops::data(a), bd = Ops::data(b), cd = Ops::data(c);
    const bool agrad = a.requires_grad(), bgrad = b.requires_grad();
    Ops::maybe_record(c, {&a, &b}, [ad, bd, cd, agrad, bgrad]() {
        const std::span<const double> dc = Ops::out_grad(cd);
        if (dc.empty()) return;
        if (agrad) {
            std::vector<double>& da = Ops::grad_buffer(ad);
            for (size_t i = 0; i < dc.size(); ++i) da[i] += dc[i];
        }
        if (bgrad) {
            std::vector<double>& db = Ops::grad_buffer(bd);
            for (size_t i = 0; i < dc.size(); ++i) db[i] += dc[i];
        }
    });
    return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape("sub", a, b);
    std::vector<double> cv(a.values().begin(), a.values().end());
    const std::span<const double> bv = b.values();
    for (size_t i = 0; i < cv.size(); ++i) cv[i] -= bv[i];
    Tensor c = Ops::make(a.shape(), std::move(cv));

    auto ad = Ops::data(a), bd = Ops::data(b), cd = Ops::data(c);
    const bool agrad = a.requires_grad(), bgrad = b.requires_grad();
    Ops::maybe_record(c, {&a, &b}, [ad, bd, cd, agrad, bgrad]() {
        const std::span<const double> dc = Ops::out_grad(cd);
        if (dc.empty()) return;
        if (agrad) {
            std::vector<double>& da = Ops::grad_buffer(ad);
            for (size_t i = 0; i < dc.size(); ++i) da[i] += dc[i];
        }
        if (bgrad) {
            std::vector<double>& db = Ops::grad_buffer(bd);
            for (size_t i = 0; i < dc.size(); ++i) db[i] -= dc[i];
        }
    });
    return c;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape("mul", a, b);
    std::vector<double> cv(a.values().begin(), a.values().end());
    const std::span<const double> bv = b.values();
    for (size_t i = 0; i < cv.size(); ++i) cv[i] *= bv[i];
    Tensor c = Ops::make(a.shape(), std::move(cv));

    auto ad = Ops::data(a), bd = Ops::data(b), cd = Ops::data(c);
    const bool agrad = a.requires_grad(), bgrad = b.requires_grad();
    Ops::maybe_record(c, {&a, &b}, [ad, bd, cd, agrad, bgrad]() {
        const std::span<const double> dc = Ops::out_grad(cd);
        if (dc.empty()) return;
        if (agrad) {
            std::vector<double>& da = Ops::grad_buffer(ad);
            for (size_t i = 0; i < dc.size(); ++i) da[i] += dc[i] * bd->v[i];
        }
        if (bgrad) {
            std::vector<double>& db = Ops::grad_buffer(bd);
            for (size_t i = 0; i < dc.size(); ++i) db[i] += dc[i] * ad->v[i];
        }
    });
    return c;
}

Tensor scale(const Tensor& a, double cfac) {
    std::vector<double> cv(a.values().begin(), a.values().end());
    for (double& x : cv) x *= cfac;
    Tensor c = Ops::make(a.shape(), std::move(cv));

    auto ad = Ops::data(a), cd = Ops::data(c);
    Ops::maybe_record(c, {&a}, [ad, cd, cfac]() {
        const std::span<const double> dc = Ops::out_grad(cd);
        if (dc.empty()) return;
        std::vector<double>& da = Ops::grad_buffer(ad);
        for (size_t i = 0; i < dc.size(); ++i) da[i] += cfac * dc[i];
    });
    return c;
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
    if (a.shape().size() != 2 || bias.shape().size() != 1 || bias.shape()[0] != a.cols()) {
        throw DimensionError("add_bias: shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(bias.shape()));
    }
    const int64_t m = a.rows(), n = a.cols();
    std::vector<double> cv(a.values().begin(), a.values().end());
    const std::span<const double> bv = bias.values();
    for (int64_t i = 0; i < m; ++i) {
        double* crow = cv.data() + i * n;
        for (int64_t j = 0; j < n; ++j) crow[j] += bv[j];
    }
    Tensor c = Ops::make(a.shape(), std::move(cv));

    auto ad = Ops::data(a), bd = Ops::data(bias), cd = Ops::data(c);
    const bool agrad = a.requires_grad(), bgrad = bias.requires_grad();
    Ops::maybe_record(c, {&a, &bias}, [ad, bd, cd, m, n, agrad, bgrad]() {
        const std::span<const double> dc = Ops::out_grad(cd);
        if (dc.empty()) return;
        if (agrad) {
            std::vector<double>& da = Ops::grad_buffer(ad);
            for (size_t i = 0; i < dc.size(); ++i) da[i] += dc[i];
        }
        if (bgrad) {
            std::vector<double>& db = Ops::grad_buffer(bd);
            for (int64_t i = 0; i < m; ++i) {
                const double* dcrow = dc.data() + i * n;
                for (int64_t j = 0; j < n; ++j) db[static_cast<size_t>(j)] += dcrow[j];
            }
        }
    });
    return c;
}

Tensor silu(const Tensor& a) {
    std::vector<double> cv(static_cast<size_t>(a.size()));
    const std::span<const double> av = a.values();
    for (size_t i = 0; i < cv.size(); ++i) {
        const double x = av[i];
        cv[i] = x / (1.0 + std::exp(-x));
    }
    Tensor c = Ops::make(a.shape(), std::move(cv));

    auto ad = Ops::data(a), cd = Ops::data(c);
    Ops::maybe_record(c, {&a}, [ad, cd]() {
        const std::span<const double> dc = Ops::out_grad(cd);
        if (dc.empty()) return;
        std::vector<double>& da = Ops::grad_buffer(ad);
        for (size_t i = 0; i < dc.size(); ++i) {
            const double x = ad->v[i];
            const double s = 1.0 / (1.0 + std::exp(-x));
            da[i] += dc[i] * s * (1.0 + x * (1.0 - s));
        }
    });
    return c;
}

Tensor square(const Tensor& a) {
    std::vector<double> cv(static_cast<size_t>(a.size()));
    const std::span<const double> av = a.values();
    for (size_t i = 0; i < cv.size(); ++i) cv[i] = av[i] * av[i];
    Tensor c = Ops::make(a.shape(), std::move(cv));

    auto ad = Ops::data(a), cd = Ops::data(c);
    Ops::maybe_record(c, {&a}, [ad, cd]() {
        const std::span<const double> dc = Ops::out_grad(cd);
        if (dc.empty()) return;
        std::vector<double>& da = Ops::grad_buffer(ad);
        for (size_t i = 0; i < dc.size(); ++i) da[i] += dc[i] * 2.0 * ad->v[i];
    });
    return c;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.rows() != b.rows()) {
        throw DimensionError("concat_cols: shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    }
    const int64_t m = a.rows(), p = a.cols(), q = b.cols();
    std::vector<double> cv(static_cast<size_t>(m * (p + q)));
    const double* ap = a.values().data();
    const double* bp = b.values().data();
    for (int64_t i = 0; i < m; ++i) {
        double* crow = cv.data() + i * (p + q);
        for (int64_t j = 0; j < p; ++j) crow[j] = ap[i * p + j];
        for (int64_t j = 0; j < q; ++j) crow[p + j] = bp[i * q + j];
    }
    Tensor c = Ops::make({m, p + q}, std::move(cv));

    auto ad = Ops::data(a), bd = Ops::data(b), cd = Ops::data(c);
    const bool agrad = a.requires_grad(), bgrad = b.requires_grad();
    Ops::maybe_record(c, {&a, &b}, [ad, bd, cd, m, p, q, agrad, bgrad]() {
        const std::span<const double> dc = Ops::out_grad(cd);
        if (dc.empty()) return;
        if (agrad) {
            std::vector<double>& da = Ops::grad_buffer(ad);
            for (int64_t i = 0; i < m; ++i)
                for (int64_t j = 0; j < p; ++j) da[static_cast<size_t>(i * p + j)] += dc[i * (p + q) + j];
        }
        if (bgrad) {
            std::vector<double>& db = Ops::grad_buffer(bd);
            for (int64_t i = 0; i < m; ++i)
                for (int64_t j = 0; j < q; ++j) db[static_cast<size_t>(i * q + j)] += dc[i * (p + q) + p + j];
        }
    });
    return c;
}

Tensor sum_all(const Tensor& a) {
    double acc = 0.0;
    for (double x : a.values()) acc += x;
    Tensor c = Tensor::scalar(acc);

    auto ad = Ops::data(a), cd = Ops::data(c);
    Ops::maybe_record(c, {&a}, [ad, cd]() {
        const std::span<const double> dc = Ops::out_grad(cd);
        if (dc.empty()) return;
        std::vector<double>& da = Ops::grad_buffer(ad);
        for (double& g : da) g += dc[0];
    });
    return c;
}

Tensor mean_all(const Tensor& a) {
    if (a.size() == 0) throw ContractError("mean_all of an empty tensor");
    const double inv_n = 1.0 / static_cast<double>(a.size());
    double acc = 0.0;
    for (double x : a.values()) acc += x;
    Tensor c = Tensor::scalar(acc * inv_n);

    auto ad = Ops::data(a), cd = Ops::data(c);
    Ops::maybe_record(c, {&a}, [ad, cd, inv_n]() {
        const std::span<const double> dc = Ops::out_grad(cd);
        if (dc.empty()) return;
        std::vector<double>& da = Ops::grad_buffer(ad);
        for (double& g : da) g += dc[0] * inv_n;
    });
    return c;
}

Tensor mean_squared(const Tensor& a, const Tensor& b) {
    check_same_shape("mean_squared", a, b);
    return mean_all(square(sub(a, b)));
}

}  // namespace sdft

#include "sdft/model.hpp"

#include <cmath>

#include "sdft/rng.hpp"

namespace sdft {

std::vector<double> TimeEmbedding::embed(int t) const {
    if (dim < 2 || dim % 2 != 0) {
        throw ParameterError("time embedding dim must be even and >= 2, got " + std::to_string(dim));
    }
    const int half = dim / 2;
    std::vector<double> out(static_cast<size_t>(dim));
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(max_period) * static_cast<double>(i) / half);
        const double arg = static_cast<double>(t) * freq;
        out[static_cast<size_t>(2 * i)] = std::sin(arg);
        out[static_cast<size_t>(2 * i + 1)] = std::cos(arg);
    }
    return out;
}

DenoiserModel DenoiserModel::init(int input_dim, std::vector<int> hidden_dims, int time_embed_dim,
                                  uint64_t seed) {
    if (input_dim < 1) throw ParameterError("input_dim must be >= 1");
    if (time_embed_dim < 2 || time_embed_dim % 2 != 0) {
        throw ParameterError("time_embed_dim must be even and >= 2, got " +
                             std::to_string(time_embed_dim));
    }
    for (int h : hidden_dims) {
        if (h < 1) throw ParameterError("hidden layer width must be >= 1");
    }

    DenoiserModel m;
    m.input_dim_ = input_dim;
    m.time_embed_dim_ = time_embed_dim;
    m.hidden_dims_ = std::move(hidden_dims);
    m.temb_.dim = time_embed_dim;

    Rng rng = Rng::substream(seed, "model-init");
    int64_t fan_in = input_dim + time_embed_dim;
    std::vector<int64_t> outs;
    for (int h : m.hidden_dims_) outs.push_back(h);
    outs.push_back(input_dim);

    for (int64_t fan_out : outs) {
        Layer layer;
        layer.weight = Tensor::zeros({fan_in, fan_out});
        layer.bias = Tensor::zeros({fan_out});
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& w : layer.weight.mutable_values()) w = (2.0 * rng.uniform() - 1.0) * a;
        layer.weight.set_requires_grad(true);
        layer.bias.set_requires_grad(true);
        m.layers_.push_back(std::move(layer));
        fan_in = fan_out;
    }
    return m;
}

Tensor DenoiserModel::predict(const Tensor& x_t, const std::vector<int>& ts) const {
    if (layers_.empty()) throw ContractError("predict on an uninitialized model");
    if (x_t.shape().size() != 2 || x_t.cols() != input_dim_) {
        throw DimensionError("predict: input shape " + shape_str(x_t.shape()) + " does not match input_dim " +
                             std::to_string(input_dim_));
    }
    const int64_t batch = x_t.rows();
    if (static_cast<int64_t>(ts.size()) != batch) {
        throw DimensionError("predict: " + std::to_string(ts.size()) + " timesteps for batch of " +
                             std::to_string(batch));
    }
    if (!x_t.all_finite()) throw ContractError("predict: non-finite values in input");

    std::vector<double> emb(static_cast<size_t>(batch * time_embed_dim_));
    for (int64_t i = 0; i < batch; ++i) {
        if (ts[static_cast<size_t>(i)] < 1) {
            throw ParameterError("predict: timestep must be >= 1, got " +
                                 std::to_string(ts[static_cast<size_t>(i)]));
        }
        const std::vector<double> e = temb_.embed(ts[static_cast<size_t>(i)]);
        std::copy(e.begin(), e.end(), emb.begin() + i * time_embed_dim_);
    }
    Tensor emb_t = Tensor::from({batch, time_embed_dim_}, std::move(emb));

    Tensor h = concat_cols(x_t, emb_t);
    for (size_t l = 0; l < layers_.size(); ++l) {
        h = add_bias(matmul(h, layers_[l].weight), layers_[l].bias);
        if (l + 1 < layers_.size()) h = silu(h);
    }
    return h;
}

DenoiserModel DenoiserModel::deep_copy(bool frozen) const {
    DenoiserModel m;
    m.input_dim_ = input_dim_;
    m.time_embed_dim_ = time_embed_dim_;
    m.hidden_dims_ = hidden_dims_;
    m.temb_ = temb_;
    m.frozen_ = frozen;
    for (const Layer& l : layers_) {
        Layer c;
        c.weight = l.weight.detached_copy();
        c.bias = l.bias.detached_copy();
        c.weight.set_requires_grad(!frozen);
        c.bias.set_requires_grad(!frozen);
        m.layers_.push_back(std::move(c));
    }
    return m;
}

DenoiserModel DenoiserModel::clone_frozen() const { return deep_copy(true); }

DenoiserModel DenoiserModel::clone_trainable() const { return deep_copy(false); }

int64_t DenoiserModel::parameter_count() const {
    int64_t n = 0;
    for (const Layer& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
}

std::vector<std::pair<std::string, Tensor>> DenoiserModel::named_parameters() {
    std::vector<std::pair<std::string, Tensor>> out;
    for (size_t i = 0; i < layers_.size(); ++i) {
        out.emplace_back("layer" + std::to_string(i) + ".weight", layers_[i].weight);
        out.emplace_back("layer" + std::to_string(i) + ".bias", layers_[i].bias);
    }
    return out;
}

std::vector<double> DenoiserModel::flat_parameters() const {
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(parameter_count()));
    for (const Layer& l : layers_) {
        const auto w = l.weight.values();
        const auto b = l.bias.values();
        flat.insert(flat.end(), w.begin(), w.end());
        flat.insert(flat.end(), b.begin(), b.end());
    }
    return flat;
}

void DenoiserModel::load_flat_parameters(std::span<const double> flat) {
    if (static_cast<int64_t>(flat.size()) != parameter_count()) {
        throw DimensionError("flat parameter array of length " + std::to_string(flat.size()) +
                             " does not match model parameter count " +
                             std::to_string(parameter_count()));
    }
    size_t off = 0;
    for (Layer& l : layers_) {
        auto w = l.weight.mutable_values();
        std::copy(flat.begin() + off, flat.begin() + off + w.size(), w.begin());
        off += w.size();
        auto b = l.bias.mutable_values();
        std::copy(flat.begin() + off, flat.begin() + off + b.size(), b.begin());
        off += b.size();
    }
}

}  // namespace sdft

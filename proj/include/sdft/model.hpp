#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdft/tensor.hpp"

namespace sdft {

// Sinusoidal timestep embedding: interleaved sin/cos at geometrically spaced
// frequencies, dim must be even.
struct TimeEmbedding {
    int dim = 32;
    double max_period = 10000.0;

    std::vector<double> embed(int t) const;
};

// Callable noise predictor; lets samplers and losses run against stubs
// (zero predictor, oracle epsilon) as well as real models.
class NoisePredictor {
public:
    virtual ~NoisePredictor() = default;
    virtual Tensor predict(const Tensor& x_t, const std::vector<int>& ts) const = 0;
    virtual int dim() const = 0;
    virtual bool trainable() const { return false; }
};

// Time-conditioned MLP predicting the noise component of x_t. The timestep
// embedding is concatenated to x before the first layer. A frozen instance
// never records on the tape and never receives gradients.
class DenoiserModel : public NoisePredictor {
public:
    DenoiserModel() = default;

    static DenoiserModel init(int input_dim, std::vector<int> hidden_dims, int time_embed_dim,
                              uint64_t seed);

    Tensor predict(const Tensor& x_t, const std::vector<int>& ts) const override;
    int dim() const override { return input_dim_; }
    bool trainable() const override { return !frozen_; }

    // Deep copies. The frozen clone serves as the fixed teacher; the trainable
    // clone is the fine-tuning starting point.
    DenoiserModel clone_frozen() const;
    DenoiserModel clone_trainable() const;

    bool frozen() const { return frozen_; }
    int input_dim() const { return input_dim_; }
    const std::vector<int>& hidden_dims() const { return hidden_dims_; }
    int time_embed_dim() const { return time_embed_dim_; }

    int64_t parameter_count() const;
    std::vector<std::pair<std::string, Tensor>> named_parameters();

    std::vector<double> flat_parameters() const;
    void load_flat_parameters(std::span<const double> flat);

private:
    struct Layer {
        Tensor weight;  // [in x out]
        Tensor bias;    // [out]
    };

    DenoiserModel deep_copy(bool frozen) const;

    int input_dim_ = 0;
    int time_embed_dim_ = 0;
    std::vector<int> hidden_dims_;
    TimeEmbedding temb_;
    std::vector<Layer> layers_;
    bool frozen_ = false;
};

}  // namespace sdft

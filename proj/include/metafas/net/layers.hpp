#pragma once

#include <vector>

#include "metafas/net/params.hpp"
#include "metafas/tensor.hpp"

namespace metafas::net {

// Scratch buffers for the im2col/GEMM convolution path. One per thread.
struct Workspace {
    std::vector<double> col;
    std::vector<double> dcol;
};

// 3x3 (or kxk, odd k) convolution, stride 1, zero padding k/2. Weight shape
// {co, ci, k, k}, bias {co}.
void conv2d_forward(const Tensor& in, const Blob& w, const Blob& b, Tensor& out, Workspace& ws);
// d_in may be null when the input gradient is not needed (first layer).
// d_w/d_b may be null when parameter gradients are not needed (grad-CAM).
void conv2d_backward(const Tensor& in, const Blob& w, const Tensor& d_out, Tensor* d_in,
                     std::vector<double>* d_w, std::vector<double>* d_b, Workspace& ws);

// Batch-independent group normalization with affine parameters. Statistics
// are per sample, so cloned parameter groups carry no hidden running state.
struct NormCache {
    std::vector<double> xhat;     // normalized pre-affine values
    std::vector<double> inv_std;  // one per group
};
// Largest divisor of c that is <= requested.
int norm_groups_for(int c, int requested);
void groupnorm_forward(const Tensor& in, const Blob& gamma, const Blob& beta, int groups, Tensor& out,
                       NormCache* cache);
void groupnorm_backward(const NormCache& cache, const Blob& gamma, int groups, const Tensor& d_out,
                        Tensor& d_in, std::vector<double>* d_gamma, std::vector<double>* d_beta);

void relu_inplace(Tensor& t);
// Uses the post-activation values to recover the mask.
void relu_backward_inplace(const Tensor& out, Tensor& d);

// 2x2 average pooling, stride 2.
Tensor avgpool2_forward(const Tensor& in);
Tensor avgpool2_backward(const Tensor& d_out, int in_h, int in_w);

// Average pooling by an integer factor (used to bring the attention branch
// down to the feature grid).
Tensor avgpool_factor_forward(const Tensor& in, int factor);
Tensor avgpool_factor_backward(const Tensor& d_out, int factor);

// 2x nearest-neighbour upsampling.
Tensor upsample2_forward(const Tensor& in);
Tensor upsample2_backward(const Tensor& d_out);

// Bilinear resize (half-pixel centers) and its adjoint.
Tensor resize_bilinear_forward(const Tensor& in, int out_h, int out_w);
Tensor resize_bilinear_backward(const Tensor& d_out, int in_h, int in_w);

std::vector<double> global_avg_pool(const Tensor& in);
void global_avg_pool_backward(const std::vector<double>& d_pooled, Tensor& d_in_accum);

// Fully connected layer; weight shape {out, in}, bias {out}.
std::vector<double> linear_forward(const std::vector<double>& x, const Blob& w, const Blob& b);
void linear_backward(const std::vector<double>& x, const Blob& w, const std::vector<double>& d_y,
                     std::vector<double>* d_x, std::vector<double>* d_w, std::vector<double>* d_b);

// Efficient channel attention: per-channel global average pooling, a 1-D
// convolution of odd kernel size across the channel axis (no bias), a
// sigmoid gate, and a channelwise rescale of the input.
struct EcaCache {
    std::vector<double> z;  // pooled channel descriptor
    std::vector<double> s;  // sigmoid gate
};
void eca_forward(const Tensor& in, const std::vector<double>& w, Tensor& out, EcaCache* cache);
void eca_backward(const Tensor& in, const std::vector<double>& w, const EcaCache& cache, const Tensor& d_out,
                  Tensor& d_in, std::vector<double>* d_w);

void sigmoid_inplace(Tensor& t);

}  // namespace metafas::net

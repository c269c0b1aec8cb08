#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace metafas::net {

// One named parameter tensor.
struct Blob {
    std::string name;
    std::vector<int> shape;
    std::vector<double> v;

    std::int64_t size() const { return static_cast<std::int64_t>(v.size()); }
};

// An ordered collection of blobs. The four parameter groups theta_F/D/S/M
// are each one ParamGroup; value semantics make cloning a group (as the
// inner meta-update requires) a plain copy.
struct ParamGroup {
    std::vector<Blob> blobs;

    std::int64_t total_size() const {
        std::int64_t n = 0;
        for (const Blob& b : blobs) n += b.size();
        return n;
    }
    bool same_layout(const ParamGroup& o) const {
        if (blobs.size() != o.blobs.size()) return false;
        for (size_t i = 0; i < blobs.size(); ++i)
            if (blobs[i].name != o.blobs[i].name || blobs[i].shape != o.blobs[i].shape) return false;
        return true;
    }
};

// Gradient storage aligned blob-by-blob with a ParamGroup.
struct GradBuffer {
    std::vector<std::vector<double>> g;

    static GradBuffer zeros_like(const ParamGroup& p) {
        GradBuffer gb;
        gb.g.resize(p.blobs.size());
        for (size_t i = 0; i < p.blobs.size(); ++i) gb.g[i].assign(p.blobs[i].v.size(), 0.0);
        return gb;
    }
    void zero() {
        for (auto& b : g) std::fill(b.begin(), b.end(), 0.0);
    }
    void add(const GradBuffer& o) {
        for (size_t i = 0; i < g.size(); ++i)
            for (size_t j = 0; j < g[i].size(); ++j) g[i][j] += o.g[i][j];
    }
    void scale(double s) {
        for (auto& b : g)
            for (double& x : b) x *= s;
    }
    double sq_norm() const {
        double n = 0.0;
        for (const auto& b : g)
            for (double x : b) n += x * x;
        return n;
    }
    bool empty() const { return g.empty(); }
};

// The four independently addressed parameter groups. The parsing encoder is
// theta_f itself: there is no second copy of the encoder weights anywhere.
struct NetworkParams {
    ParamGroup theta_f;  // shared feature extractor / parsing encoder
    ParamGroup theta_d;  // depth estimation head
    ParamGroup theta_s;  // parsing decoder + attention skip branch
    ParamGroup theta_m;  // meta learner
};

struct NetworkGrads {
    GradBuffer f, d, s, m;

    static NetworkGrads zeros_like(const NetworkParams& p) {
        return {GradBuffer::zeros_like(p.theta_f), GradBuffer::zeros_like(p.theta_d),
                GradBuffer::zeros_like(p.theta_s), GradBuffer::zeros_like(p.theta_m)};
    }
    void zero() {
        f.zero();
        d.zero();
        s.zero();
        m.zero();
    }
    void add(const NetworkGrads& o) {
        f.add(o.f);
        d.add(o.d);
        s.add(o.s);
        m.add(o.m);
    }
};

}  // namespace metafas::net

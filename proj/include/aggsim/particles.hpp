#pragma once
#include <cstdint>
#include <vector>

namespace aggsim {

// Structure-of-arrays particle storage for the Monte Carlo engine.
//   r      position in [0, L)
//   v      velocity, exactly +1.0 or -1.0 (stored as double so the advection
//          and tumbling loops stay pure double-lane SIMD)
//   y      internal-state deviation y = M(S) - m
//   s_prev pathway value S^{k-1}_{(l)}: the previous field interpolated at the
//          particle's previous position
struct ParticleEnsemble {
    std::vector<double> r;
    std::vector<double> v;
    std::vector<double> y;
    std::vector<double> s_prev;

    std::size_t size() const { return r.size(); }
    void resize(std::size_t n) {
        r.resize(n);
        v.resize(n);
        y.resize(n);
        s_prev.resize(n);
    }
};

} // namespace aggsim

#pragma once

#include "dopo/squeezing.hpp"
#include "dopo/stationary.hpp"

namespace fixtures {

inline dopo::ReducedParams fig1(double kappa = 1000.0) {
    dopo::ReducedParams p;
    p.sigma = 1;
    p.delta1 = 1.0;
    p.mu = 1.2;
    p.kappa = kappa;
    return p;
}

/// Newton-refined soliton and its eigenbasis at sigma=+1, Delta1=1, mu=1.2 on the default grid,
/// built once per test process.
inline const dopo::ModalContext& fig1_context() {
    static const dopo::ModalContext ctx(dopo::refined_bright_soliton(fig1(), dopo::make_grid()));
    return ctx;
}

} // namespace fixtures

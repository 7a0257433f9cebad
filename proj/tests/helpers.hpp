#pragma once

#include <vector>

#include "dinfo/process_model.hpp"

namespace dinfo::testing {

// Every symbol i.i.d. uniform, independent of the past.
inline TransitionModel iid_uniform_model(int nx, int ny, int nz, int order) {
  AlphabetSpec a{nx, ny, nz};
  long contexts = 1;
  for (int i = 0; i < order; ++i) contexts *= a.joint_size();
  auto uniform = [&](int m) {
    std::vector<double> k(contexts * m, 1.0 / m);
    return k;
  };
  return TransitionModel(a, order, uniform(nx), uniform(ny), uniform(nz));
}

// Binary X copies the previous Y exactly; Y is i.i.d. uniform.
inline TransitionModel copy_model() {
  AlphabetSpec a{2, 2, 1};
  // context = x@1 * 2 + y@1
  std::vector<double> kx(4 * 2, 0.0);
  for (int xp = 0; xp < 2; ++xp) {
    for (int yp = 0; yp < 2; ++yp) {
      kx[(xp * 2 + yp) * 2 + yp] = 1.0;
    }
  }
  std::vector<double> ky(4 * 2, 0.5);
  std::vector<double> kz(4 * 1, 1.0);
  return TransitionModel(a, 1, std::move(kx), std::move(ky), std::move(kz));
}

// Binary X is a flip chain driven only by its own past: P(1|0) = a,
// P(0|1) = b. Y is i.i.d. uniform. Stationary X marginal is (b, a)/(a+b).
inline TransitionModel chain_x_model(double a_up, double b_down) {
  AlphabetSpec a{2, 2, 1};
  std::vector<double> kx(4 * 2);
  for (int xp = 0; xp < 2; ++xp) {
    for (int yp = 0; yp < 2; ++yp) {
      double p1 = xp == 0 ? a_up : 1.0 - b_down;
      kx[(xp * 2 + yp) * 2 + 0] = 1.0 - p1;
      kx[(xp * 2 + yp) * 2 + 1] = p1;
    }
  }
  std::vector<double> ky(4 * 2, 0.5);
  std::vector<double> kz(4 * 1, 1.0);
  return TransitionModel(a, 1, std::move(kx), std::move(ky), std::move(kz));
}

// Sticky binary Y (stays with probability `stay`); X is the previous Y pushed
// through a symmetric channel with error probability `flip`. The Y path
// influences X directly, and X alone is not Markov of any finite order.
inline TransitionModel noisy_relay_model(double stay, double flip) {
  AlphabetSpec a{2, 2, 1};
  std::vector<double> kx(4 * 2), ky(4 * 2), kz(4 * 1, 1.0);
  for (int xp = 0; xp < 2; ++xp) {
    for (int yp = 0; yp < 2; ++yp) {
      long c = xp * 2 + yp;
      kx[c * 2 + yp] = 1.0 - flip;
      kx[c * 2 + (1 - yp)] = flip;
      ky[c * 2 + yp] = stay;
      ky[c * 2 + (1 - yp)] = 1.0 - stay;
    }
  }
  return TransitionModel(a, 1, std::move(kx), std::move(ky), std::move(kz));
}

}  // namespace dinfo::testing

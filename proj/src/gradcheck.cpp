#include "spdpool/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "spdpool/layers.hpp"
#include "spdpool/network.hpp"
#include "spdpool/pooling.hpp"
#include "spdpool/random_matrix.hpp"
#include "spdpool/rng.hpp"
#include "spdpool/spectral.hpp"
#include "spdpool/types.hpp"

namespace spdpool {

namespace {

constexpr Eigen::Index kExhaustiveLimit = 512;
constexpr Eigen::Index kSampledProbes = 256;

double frob_inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b).sum();
}

/// Strictly decreasing SPD spectrum with gaps >= 0.15, min >= 0.2.
Eigen::VectorXd spd_spectrum(CounterRng& rng, Eigen::Index d) {
  Eigen::VectorXd s(d);
  double v = 0.2 + 0.3 * rng.next_unit();
  for (Eigen::Index i = d - 1; i >= 0; --i) {
    s[i] = v;
    v += 0.15 + 0.35 * rng.next_unit();
  }
  return s;
}

/// Mixed-sign spectrum with gaps >= 0.15, every value at least 0.06 away
/// from the rectification threshold.
Eigen::VectorXd mixed_spectrum(CounterRng& rng, Eigen::Index d, double epsilon) {
  Eigen::VectorXd s(d);
  double v = -1.8 + 0.3 * rng.next_unit();
  for (Eigen::Index i = d - 1; i >= 0; --i) {
    if (std::abs(v - epsilon) < 0.06) {
      v = epsilon + 0.06;
    }
    s[i] = v;
    v += 0.15 + 0.35 * rng.next_unit();
  }
  return s;
}

SymMatrix matrix_with_spectrum(CounterRng& rng, const Eigen::VectorXd& spectrum) {
  const Eigen::MatrixXd q = random_orthogonal(rng, spectrum.size());
  return SymMatrix::symmetrized(q * spectrum.asDiagonal() * q.transpose());
}

SymMatrix random_symmetric(CounterRng& rng, Eigen::Index d) {
  return SymMatrix::symmetrized(random_gaussian_matrix(rng, d, d));
}

/// d×n centered feature block whose sample covariance is exactly (up to
/// roundoff) a random rotation of the given spectrum, so downstream
/// eigendecompositions inherit its gaps.
Eigen::MatrixXd features_with_covariance(CounterRng& rng, Eigen::Index d, Eigen::Index n,
                                         const Eigen::VectorXd& spectrum) {
  Eigen::MatrixXd m = random_gaussian_matrix(rng, d, n);
  m.colwise() -= m.rowwise().mean().eval();
  const SymMatrix cm = SymMatrix::symmetrized(m * m.transpose() / double(n - 1));
  const EigenPair ep = sym_eig(cm);
  const Eigen::MatrixXd q = random_orthogonal(rng, d);
  const Eigen::MatrixXd whiten =
      ep.U * ep.sigma.cwiseSqrt().cwiseInverse().asDiagonal() * ep.U.transpose();
  return q * spectrum.cwiseSqrt().asDiagonal() * whiten * m;
}

/// Central difference of f along a +/- step perturbation of *slot.
template <typename F>
double central_diff(double* slot, double step, F&& f) {
  const double saved = *slot;
  *slot = saved + step;
  const double plus = f();
  *slot = saved - step;
  const double minus = f();
  *slot = saved;
  return (plus - minus) / (2.0 * step);
}

struct Worst {
  double value = 0.0;
  void feed(double analytic, double fd) {
    value = std::max(value, gradient_rel_error(analytic, fd));
  }
};

/// Applies the corruption hook: a skewed first comparison forces failure.
double corrupted(double analytic, bool corrupt, bool first) {
  return corrupt && first ? analytic + 1.0 : analytic;
}

/// Compares FD over all symmetric directions of x against an analytic
/// symmetric gradient g: the directional derivative along the (i,j)+(j,i)
/// perturbation equals 2·g_ij off the diagonal and g_ii on it.
template <typename F>
void sym_direction_check(Eigen::MatrixXd& x, const Eigen::MatrixXd& g, double step,
                         Worst& worst, bool corrupt, F&& loss) {
  bool first = true;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = i; j < x.cols(); ++j) {
      const double si = x(i, j);
      const double sj = x(j, i);
      x(i, j) = si + step;
      if (i != j) x(j, i) = sj + step;
      const double plus = loss();
      x(i, j) = si - step;
      if (i != j) x(j, i) = sj - step;
      const double minus = loss();
      x(i, j) = si;
      x(j, i) = sj;
      const double fd = (plus - minus) / (2.0 * step);
      const double expect = i == j ? g(i, i) : 2.0 * g(i, j);
      worst.feed(corrupted(expect, corrupt, first), fd);
      first = false;
    }
  }
}

LayerCheck check_bimap(const GradCheckOptions& o) {
  CounterRng rng(o.seed);
  const bool corrupt = o.corrupt_layer == "bimap";
  Worst worst;
  for (int t = 0; t < o.instances; ++t) {
    const Eigen::Index d = o.dim;
    const Eigen::Index d_out = std::max<Eigen::Index>(d / 2, 1);
    const SymMatrix x = matrix_with_spectrum(rng, spd_spectrum(rng, d));
    const SpdMatrix xs = SpdMatrix::assume_spd(x);
    BiMapParams p{random_orthogonal(rng, d).topRows(d_out)};
    const SymMatrix r = random_symmetric(rng, d_out);
    const BiMapGrads grads = bimap_backward(r, xs, p);

    Eigen::MatrixXd xm = x.mat();
    const auto loss_x = [&]() {
      const SpdMatrix in = SpdMatrix::assume_spd(SymMatrix::symmetrized(xm));
      return frob_inner(r.mat(), bimap_forward(in, p).mat());
    };
    sym_direction_check(xm, grads.grad_input.mat(), o.step, worst, corrupt, loss_x);

    const auto loss_w = [&]() { return frob_inner(r.mat(), bimap_forward(xs, p).mat()); };
    for (Eigen::Index i = 0; i < p.W.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.W.cols(); ++j) {
        const double fd = central_diff(&p.W(i, j), o.step, loss_w);
        worst.feed(grads.grad_weight(i, j), fd);
      }
    }
  }
  return {"bimap", worst.value};
}

LayerCheck check_reeig(const GradCheckOptions& o) {
  CounterRng rng(o.seed);
  const bool corrupt = o.corrupt_layer == "reeig";
  const ReEigParams p{1e-4};
  Worst worst;
  for (int t = 0; t < o.instances; ++t) {
    const SymMatrix x = matrix_with_spectrum(rng, mixed_spectrum(rng, o.dim, p.epsilon));
    const SymMatrix r = random_symmetric(rng, o.dim);
    const auto [out, tape] = reeig_forward(x, p);
    const SymMatrix grad = reeig_backward(r, tape, p);

    Eigen::MatrixXd xm = x.mat();
    const auto loss = [&]() {
      const auto [y, unused] = reeig_forward(SymMatrix::symmetrized(xm), p);
      return frob_inner(r.mat(), y.mat());
    };
    sym_direction_check(xm, grad.mat(), o.step, worst, corrupt, loss);
  }
  return {"reeig", worst.value};
}

LayerCheck check_logeig(const GradCheckOptions& o) {
  CounterRng rng(o.seed);
  const bool corrupt = o.corrupt_layer == "logeig";
  Worst worst;
  for (int t = 0; t < o.instances; ++t) {
    const SymMatrix x = matrix_with_spectrum(rng, spd_spectrum(rng, o.dim));
    const SymMatrix r = random_symmetric(rng, o.dim);
    const auto [out, tape] = logeig_forward(SpdMatrix::assume_spd(x));
    const SymMatrix grad = logeig_backward(r, tape);

    Eigen::MatrixXd xm = x.mat();
    const auto loss = [&]() {
      const SpdMatrix in = SpdMatrix::assume_spd(SymMatrix::symmetrized(xm));
      return frob_inner(r.mat(), logeig_forward(in).first.mat());
    };
    sym_direction_check(xm, grad.mat(), o.step, worst, corrupt, loss);
  }
  return {"logeig", worst.value};
}

LayerCheck check_vectorize(const GradCheckOptions& o) {
  CounterRng rng(o.seed);
  const bool corrupt = o.corrupt_layer == "vectorize";
  Worst worst;
  for (int t = 0; t < o.instances; ++t) {
    const SymMatrix x = random_symmetric(rng, o.dim);
    Eigen::VectorXd r(o.dim * (o.dim + 1) / 2);
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      r[i] = rng.next_gaussian();
    }
    const SymMatrix grad = vectorize_backward(r, o.dim);

    Eigen::MatrixXd xm = x.mat();
    const auto loss = [&]() { return r.dot(vectorize_sym(SymMatrix::symmetrized(xm))); };
    sym_direction_check(xm, grad.mat(), o.step, worst, corrupt, loss);
  }
  return {"vectorize", worst.value};
}

/// Shared rig for the dense, softmax, and full-network checks: a spec, a
/// feature block with safeguarded pooled spectrum, and FD over chosen
/// parameter slots against the analytic gradients.
struct NetRig {
  NetworkSpec spec;
  TrainState state;
  FeatureSet input;
  Eigen::Index label = 0;
  Gradients grads;

  double loss() const {
    const Prediction p = forward(spec, state, input);
    return cross_entropy(p.probabilities, label);
  }

  void compute_analytic() {
    LayerTape tape;
    forward(spec, state, input, &tape);
    grads = backward(spec, state, tape, label);
  }
};

Eigen::VectorXd geometric_spectrum(Eigen::Index d, double lo, double hi) {
  Eigen::VectorXd s(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double t = d == 1 ? 0.0 : double(i) / double(d - 1);
    s[i] = std::exp(std::log(hi) + (std::log(lo) - std::log(hi)) * t);
  }
  return s;
}

NetRig make_rig(const NetworkSpec& spec, Eigen::Index input_dim, CounterRng& rng,
                Eigen::Index label) {
  NetRig rig;
  rig.spec = spec;
  rig.state = init_state(spec, input_dim);
  const Eigen::Index n = input_dim + 4;
  rig.input = FeatureSet{
      features_with_covariance(rng, input_dim, n, geometric_spectrum(input_dim, 0.5, 32.0))};
  rig.label = label;
  rig.compute_analytic();
  return rig;
}

void check_matrix_params(NetRig& rig, std::size_t layer, double step, CounterRng& rng,
                         Worst& worst, bool corrupt) {
  Eigen::MatrixXd& w = rig.state.params[layer].W;
  const Eigen::MatrixXd& gw = rig.grads.params[layer].W;
  const auto loss = [&]() { return rig.loss(); };
  bool first = true;
  if (w.size() <= kExhaustiveLimit) {
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      const double fd = central_diff(w.data() + k, step, loss);
      worst.feed(corrupted(gw(k % w.rows(), k / w.rows()), corrupt, first), fd);
      first = false;
    }
  } else {
    for (Eigen::Index probe = 0; probe < kSampledProbes; ++probe) {
      const Eigen::Index k =
          static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(w.size())));
      const double fd = central_diff(w.data() + k, step, loss);
      worst.feed(corrupted(gw(k % w.rows(), k / w.rows()), corrupt, first), fd);
      first = false;
    }
  }
}

void check_bias_params(NetRig& rig, std::size_t layer, double step, CounterRng& rng,
                       Worst& worst, bool corrupt) {
  Eigen::VectorXd& b = rig.state.params[layer].b;
  const Eigen::VectorXd& gb = rig.grads.params[layer].b;
  const auto loss = [&]() { return rig.loss(); };
  bool first = true;
  if (b.size() <= kExhaustiveLimit) {
    for (Eigen::Index k = 0; k < b.size(); ++k) {
      const double fd = central_diff(b.data() + k, step, loss);
      worst.feed(corrupted(gb[k], corrupt, first), fd);
      first = false;
    }
  } else {
    for (Eigen::Index probe = 0; probe < kSampledProbes; ++probe) {
      const Eigen::Index k =
          static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(b.size())));
      const double fd = central_diff(b.data() + k, step, loss);
      worst.feed(corrupted(gb[k], corrupt, first), fd);
      first = false;
    }
  }
}

NetworkSpec minimal_dense_spec(Eigen::Index input_dim, Eigen::Index classes,
                               std::uint64_t seed) {
  NetworkSpec spec;
  spec.layers = {cov_pool(), logeig(), vectorize(), dense(classes), softmax(classes)};
  spec.seed = seed;
  return spec;
}

LayerCheck check_dense(const GradCheckOptions& o) {
  CounterRng rng(o.seed);
  const bool corrupt = o.corrupt_layer == "dense";
  Worst worst;
  const Eigen::Index input_dim = 4;
  const Eigen::Index classes = 3;
  for (int t = 0; t < o.instances; ++t) {
    NetworkSpec spec = minimal_dense_spec(input_dim, classes, o.seed + t);
    NetRig rig = make_rig(spec, input_dim, rng, t % classes);
    check_matrix_params(rig, 3, o.step, rng, worst, corrupt);
    check_bias_params(rig, 3, o.step, rng, worst, false);
  }
  return {"dense", worst.value};
}

/// The softmax layer has no parameters; the gradient at the final dense
/// bias equals the cross-entropy gradient at the softmax input, so probing
/// the bias isolates the softmax backward.
LayerCheck check_softmax(const GradCheckOptions& o) {
  CounterRng rng(o.seed);
  const bool corrupt = o.corrupt_layer == "softmax_xent";
  Worst worst;
  const Eigen::Index input_dim = 4;
  const Eigen::Index classes = 5;
  for (int t = 0; t < o.instances; ++t) {
    NetworkSpec spec = minimal_dense_spec(input_dim, classes, o.seed + 7 * t + 1);
    NetRig rig = make_rig(spec, input_dim, rng, t % classes);
    check_bias_params(rig, 3, o.step, rng, worst, corrupt);
  }
  return {"softmax_xent", worst.value};
}

LayerCheck check_network(const GradCheckOptions& o, const std::string& preset) {
  CounterRng rng(o.seed);
  const std::string name = "network:" + preset;
  const bool corrupt = o.corrupt_layer == name;
  Worst worst;
  const Eigen::Index classes = 3;
  NetworkSpec spec = build_preset(preset, o.dim, classes);
  spec.seed = o.seed;
  NetRig rig = make_rig(spec, o.dim, rng, 1);
  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    if (rig.state.params[li].W.size() > 0) {
      check_matrix_params(rig, li, o.step, rng, worst, corrupt);
    }
    if (rig.state.params[li].b.size() > 0) {
      check_bias_params(rig, li, o.step, rng, worst, false);
    }
  }
  Eigen::MatrixXd& features = rig.input.samples;
  for (Eigen::Index k = 0; k < features.size(); ++k) {
    const double fd = central_diff(features.data() + k, o.step, [&]() { return rig.loss(); });
    worst.feed(rig.grads.input(k % features.rows(), k / features.rows()), fd);
  }
  return {name, worst.value};
}

}  // namespace

double gradient_rel_error(double analytic, double fd) {
  return std::abs(analytic - fd) /
         std::max({std::abs(analytic), std::abs(fd), 1e-4});
}

std::vector<LayerCheck> run_gradient_checks(const GradCheckOptions& o) {
  if (o.dim < 2 || o.dim > 16) {
    throw UsageError("gradient-check dimension must be between 2 and 16");
  }
  if (o.instances < 1) {
    throw UsageError("gradient-check instance count must be positive");
  }
  if (!(o.step > 0.0) || !(o.tolerance > 0.0)) {
    throw UsageError("gradient-check step and tolerance must be positive");
  }
  std::vector<LayerCheck> checks;
  checks.push_back(check_bimap(o));
  checks.push_back(check_reeig(o));
  checks.push_back(check_logeig(o));
  checks.push_back(check_vectorize(o));
  checks.push_back(check_dense(o));
  checks.push_back(check_softmax(o));
  if (o.networks) {
    if (!o.preset_filter.empty() &&
        std::find(preset_names().begin(), preset_names().end(), o.preset_filter) ==
            preset_names().end()) {
      throw UsageError("unknown preset: " + o.preset_filter);
    }
    for (const std::string& preset : preset_names()) {
      if (o.preset_filter.empty() || preset == o.preset_filter) {
        checks.push_back(check_network(o, preset));
      }
    }
  }
  return checks;
}

}  // namespace spdpool

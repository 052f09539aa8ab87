#include "nets.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "error.hpp"
#include "rng.hpp"

namespace shiftlab {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Both architectures share one computation: each input expands into `per`
// rows (the whole signal for FC, the d cyclic patches for conv), every row
// goes through relu(W row), and the outputs are averaged over rows.
struct Rows {
  MatrixXd m;       // (n * per) x p
  std::size_t per;  // rows per sample
};

void check_input(std::size_t expected, std::size_t got) {
  require(expected == got, ErrorCode::kShapeMismatch,
          "input has dimension " + std::to_string(got) + ", net expects " +
              std::to_string(expected));
}

Rows fc_rows(const FcNet& net, const std::vector<std::span<const double>>& xs) {
  Rows r{MatrixXd(static_cast<Index>(xs.size()), net.w.cols()), 1};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    check_input(net.dim(), xs[i].size());
    for (std::size_t t = 0; t < xs[i].size(); ++t) r.m(static_cast<Index>(i), static_cast<Index>(t)) = xs[i][t];
  }
  return r;
}

Rows conv_rows(const ConvGapNet& net, const std::vector<std::span<const double>>& xs) {
  const std::size_t d = net.d, q = net.patch();
  Rows r{MatrixXd(static_cast<Index>(xs.size() * d), static_cast<Index>(q)), d};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    check_input(d, xs[i].size());
    for (std::size_t p = 0; p < d; ++p) {
      const auto row = static_cast<Index>(i * d + p);
      for (std::size_t t = 0; t < q; ++t) r.m(row, static_cast<Index>(t)) = xs[i][(p + t) % d];
    }
  }
  return r;
}

// Output of each sample from the preactivations H = rows * W^T.
VectorXd outputs(const MatrixXd& h, const VectorXd& v, std::size_t per) {
  const Index n = h.rows() / static_cast<Index>(per);
  VectorXd f = VectorXd::Zero(n);
  for (Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Index r = i * static_cast<Index>(per); r < (i + 1) * static_cast<Index>(per); ++r) {
      for (Index k = 0; k < h.cols(); ++k) {
        const double a = h(r, k);
        if (a > 0.0) acc += a * v[k];
      }
    }
    f[i] = acc / static_cast<double>(per);
  }
  return f;
}

double forward_rows(const MatrixXd& w, const VectorXd& v, const Rows& rows) {
  const MatrixXd h = rows.m * w.transpose();
  return outputs(h, v, rows.per)[0];
}

// d f / d row for a single sample: (1/per) * (v .* mask_r)^T W for each row r.
MatrixXd row_gradients(const MatrixXd& w, const VectorXd& v, const Rows& rows) {
  MatrixXd g = rows.m * w.transpose();
  for (Index r = 0; r < g.rows(); ++r) {
    for (Index k = 0; k < g.cols(); ++k) g(r, k) = g(r, k) > 0.0 ? v[k] : 0.0;
  }
  return (g * w) / static_cast<double>(rows.per);
}

ParamGradient param_gradient(const MatrixXd& w, const VectorXd& v, const Rows& rows) {
  MatrixXd h = rows.m * w.transpose();
  ParamGradient out{MatrixXd(), VectorXd::Zero(v.size())};
  const double inv = 1.0 / static_cast<double>(rows.per);
  for (Index r = 0; r < h.rows(); ++r) {
    for (Index k = 0; k < h.cols(); ++k) {
      const double a = h(r, k);
      if (a > 0.0) {
        out.v[k] += a * inv;
        h(r, k) = v[k] * inv;
      } else {
        h(r, k) = 0.0;
      }
    }
  }
  out.w = h.transpose() * rows.m;
  return out;
}

std::vector<std::span<const double>> one(std::span<const double> x) { return {x}; }

std::vector<std::span<const double>> all_points(const LabeledSet& data) {
  std::vector<std::span<const double>> xs;
  for (std::size_t i = 0; i < data.size(); ++i) xs.push_back(data.point(i).values());
  return xs;
}

VectorXd all_labels(const LabeledSet& data) {
  VectorXd y(static_cast<Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) y[static_cast<Index>(i)] = data.label(i);
  return y;
}

void fill_normal(MatrixXd& w, VectorXd& v, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = 0; j < w.cols(); ++j) w(i, j) = normal(rng);
  for (Index k = 0; k < v.size(); ++k) v[k] = normal(rng);
}

void fill_antithetic(MatrixXd& w, VectorXd& v, std::uint64_t seed) {
  require(w.rows() % 2 == 0, ErrorCode::kInvalidArgument,
          "antithetic init needs an even width");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < w.rows(); i += 2) {
    for (Index j = 0; j < w.cols(); ++j) {
      w(i, j) = normal(rng);
      w(i + 1, j) = w(i, j);
    }
  }
  for (Index k = 0; k < v.size(); k += 2) {
    v[k] = normal(rng);
    v[k + 1] = -v[k];
  }
}

void check_arch(std::size_t d, std::size_t q, std::size_t m) {
  require(d >= 1 && m >= 1, ErrorCode::kInvalidArgument, "net needs d >= 1 and m >= 1");
  require(q >= 1 && q <= d, ErrorCode::kInvalidArgument,
          "filter length q=" + std::to_string(q) + " must lie in [1, d]");
}

void check_finite(const MatrixXd& w, const VectorXd& v) {
  require(w.allFinite() && v.allFinite(), ErrorCode::kInvalidArgument,
          "net parameters must be finite");
  require(w.rows() == v.size(), ErrorCode::kShapeMismatch,
          "first and second layer widths differ");
}

TrainTrace train(MatrixXd& w, VectorXd& v, const Rows& rows, const VectorXd& y,
                 const TrainConfig& cfg) {
  require(std::isfinite(cfg.learning_rate) && cfg.learning_rate > 0.0,
          ErrorCode::kInvalidArgument, "learning rate must be positive");
  require(rows.m.allFinite() && y.allFinite(), ErrorCode::kData, "training data not finite");

  const Index n = y.size();
  const double inv_per = 1.0 / static_cast<double>(rows.per);
  TrainTrace trace;
  MatrixXd h;
  for (std::size_t step = 0;; ++step) {
    h.noalias() = rows.m * w.transpose();
    const VectorXd res = outputs(h, v, rows.per) - y;
    const double loss = res.squaredNorm() / static_cast<double>(n);
    trace.loss.push_back(loss);
    if (!std::isfinite(loss) || loss > 1e12) {
      fail(ErrorCode::kDiverged, "training diverged at step " + std::to_string(step) +
                                     " (loss " + std::to_string(loss) + ")");
    }
    trace.final_loss = loss;
    if (step == cfg.steps || (cfg.target_loss > 0.0 && loss <= cfg.target_loss)) break;

    VectorXd gv = VectorXd::Zero(v.size());
    for (Index r = 0; r < h.rows(); ++r) {
      const double c = 2.0 * res[r / static_cast<Index>(rows.per)] * inv_per /
                       static_cast<double>(n);
      for (Index k = 0; k < h.cols(); ++k) {
        const double a = h(r, k);
        if (a > 0.0) {
          gv[k] += c * a;
          h(r, k) = c * v[k];
        } else {
          h(r, k) = 0.0;
        }
      }
    }
    w.noalias() -= cfg.learning_rate * (h.transpose() * rows.m);
    if (cfg.train_output_layer) v -= cfg.learning_rate * gv;
    trace.steps_run = step + 1;
  }
  return trace;
}

double suggest(const MatrixXd& w, const VectorXd& v, const Rows& rows, Index n,
               bool train_output_layer) {
  const Index m = w.rows(), p = w.cols();
  const Index per = static_cast<Index>(rows.per);
  const Index cols = m * p + (train_output_layer ? m : 0);
  MatrixXd jac = MatrixXd::Zero(n, cols);
  for (Index i = 0; i < n; ++i) {
    const MatrixXd block = rows.m.middleRows(i * per, per);
    MatrixXd h = block * w.transpose();
    VectorXd gv = VectorXd::Zero(m);
    for (Index r = 0; r < per; ++r) {
      for (Index k = 0; k < m; ++k) {
        const double a = h(r, k);
        if (a > 0.0) {
          gv[k] += a;
          h(r, k) = v[k];
        } else {
          h(r, k) = 0.0;
        }
      }
    }
    const MatrixXd gw = (h.transpose() * block) / static_cast<double>(per);
    for (Index k = 0; k < m; ++k) jac.row(i).segment(k * p, p) = gw.row(k);
    if (train_output_layer) jac.row(i).tail(m) = gv.transpose() / static_cast<double>(per);
  }
  const MatrixXd kernel = jac * jac.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(kernel, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  require(top > 0.0, ErrorCode::kData, "tangent kernel vanishes on the training data");
  return 0.9 * static_cast<double>(n) / top;
}

constexpr const char* kMagic = "shiftlab-net";

void write_params(const MatrixXd& w, const VectorXd& v, std::ostream& out) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint writer assumes a little-endian host");
  for (Index i = 0; i < w.rows(); ++i) {
    for (Index j = 0; j < w.cols(); ++j) {
      const double x = w(i, j);
      out.write(reinterpret_cast<const char*>(&x), sizeof x);
    }
  }
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(v.size())));
  require(static_cast<bool>(out), ErrorCode::kIo, "checkpoint write failed");
}

struct Header {
  std::string kind;
  std::size_t d = 0, q = 0, m = 0;
};

Header read_header(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kIo, "checkpoint: missing header");
  std::istringstream ss(line);
  std::string magic, version, kind, kd, kq, km;
  ss >> magic >> version >> kind >> kd >> kq >> km;
  require(magic == kMagic, ErrorCode::kIo, "checkpoint: not a shiftlab net file");
  require(version == "v1", ErrorCode::kIo, "checkpoint: unsupported version " + version);
  Header h{kind};
  auto field = [](const std::string& tok, const char* key) -> std::size_t {
    const std::string prefix = std::string(key) + "=";
    require(tok.rfind(prefix, 0) == 0, ErrorCode::kIo, "checkpoint: expected " + prefix);
    return std::stoul(tok.substr(prefix.size()));
  };
  h.d = field(kd, "d");
  h.q = field(kq, "q");
  h.m = field(km, "m");
  check_arch(h.d, h.q, h.m);
  return h;
}

void read_params(MatrixXd& w, VectorXd& v, std::istream& in) {
  for (Index i = 0; i < w.rows(); ++i) {
    for (Index j = 0; j < w.cols(); ++j) {
      double x;
      in.read(reinterpret_cast<char*>(&x), sizeof x);
      w(i, j) = x;
    }
  }
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(v.size())));
  require(static_cast<bool>(in), ErrorCode::kIo, "checkpoint: truncated parameter block");
  check_finite(w, v);
}

template <typename Net>
void save_to_path(const Net& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot open " + path + " for writing");
  save_checkpoint(net, out);
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path);
  return in;
}

}  // namespace

double fc_forward(const FcNet& net, std::span<const double> x) {
  return forward_rows(net.w, net.v, fc_rows(net, one(x)));
}

double conv_forward(const ConvGapNet& net, std::span<const double> x) {
  return forward_rows(net.w, net.v, conv_rows(net, one(x)));
}

std::vector<double> fc_input_gradient(const FcNet& net, std::span<const double> x) {
  const MatrixXd g = row_gradients(net.w, net.v, fc_rows(net, one(x)));
  return std::vector<double>(g.data(), g.data() + g.size());
}

std::vector<double> conv_input_gradient(const ConvGapNet& net, std::span<const double> x) {
  const MatrixXd g = row_gradients(net.w, net.v, conv_rows(net, one(x)));
  const std::size_t d = net.d;
  std::vector<double> out(d, 0.0);
  for (std::size_t p = 0; p < d; ++p) {
    for (Index t = 0; t < g.cols(); ++t) {
      out[(p + static_cast<std::size_t>(t)) % d] += g(static_cast<Index>(p), t);
    }
  }
  return out;
}

ParamGradient fc_param_gradient(const FcNet& net, std::span<const double> x) {
  return param_gradient(net.w, net.v, fc_rows(net, one(x)));
}

ParamGradient conv_param_gradient(const ConvGapNet& net, std::span<const double> x) {
  return param_gradient(net.w, net.v, conv_rows(net, one(x)));
}

FcNet init_normal_fc(std::size_t d, std::size_t m, std::uint64_t seed) {
  check_arch(d, d, m);
  FcNet net{MatrixXd(static_cast<Index>(m), static_cast<Index>(d)), VectorXd(static_cast<Index>(m))};
  fill_normal(net.w, net.v, seed);
  return net;
}

ConvGapNet init_normal_conv(std::size_t d, std::size_t q, std::size_t m, std::uint64_t seed) {
  check_arch(d, q, m);
  ConvGapNet net{MatrixXd(static_cast<Index>(m), static_cast<Index>(q)),
                 VectorXd(static_cast<Index>(m)), d};
  fill_normal(net.w, net.v, seed);
  return net;
}

FcNet init_antithetic_fc(std::size_t d, std::size_t m, std::uint64_t seed) {
  check_arch(d, d, m);
  FcNet net{MatrixXd(static_cast<Index>(m), static_cast<Index>(d)), VectorXd(static_cast<Index>(m))};
  fill_antithetic(net.w, net.v, seed);
  return net;
}

ConvGapNet init_antithetic_conv(std::size_t d, std::size_t q, std::size_t m,
                                std::uint64_t seed) {
  check_arch(d, q, m);
  ConvGapNet net{MatrixXd(static_cast<Index>(m), static_cast<Index>(q)),
                 VectorXd(static_cast<Index>(m)), d};
  fill_antithetic(net.w, net.v, seed);
  return net;
}

TrainTrace train_full_batch(FcNet& net, const LabeledSet& data, const TrainConfig& cfg) {
  check_finite(net.w, net.v);
  return train(net.w, net.v, fc_rows(net, all_points(data)), all_labels(data), cfg);
}

TrainTrace train_full_batch(ConvGapNet& net, const LabeledSet& data, const TrainConfig& cfg) {
  check_finite(net.w, net.v);
  return train(net.w, net.v, conv_rows(net, all_points(data)), all_labels(data), cfg);
}

double suggest_learning_rate(const FcNet& net, const LabeledSet& data,
                             bool train_output_layer) {
  return suggest(net.w, net.v, fc_rows(net, all_points(data)),
                 static_cast<Index>(data.size()), train_output_layer);
}

double suggest_learning_rate(const ConvGapNet& net, const LabeledSet& data,
                             bool train_output_layer) {
  return suggest(net.w, net.v, conv_rows(net, all_points(data)),
                 static_cast<Index>(data.size()), train_output_layer);
}

Classifier net_classifier(FcNet net) {
  Classifier c;
  c.name = "fc_net";
  c.dim = net.dim();
  auto shared = std::make_shared<const FcNet>(std::move(net));
  c.decision = [shared](std::span<const double> z) { return fc_forward(*shared, z); };
  c.gradient = [shared](std::span<const double> z) { return fc_input_gradient(*shared, z); };
  return c;
}

Classifier net_classifier(ConvGapNet net) {
  Classifier c;
  c.name = "conv_net";
  c.dim = net.dim();
  auto shared = std::make_shared<const ConvGapNet>(std::move(net));
  c.decision = [shared](std::span<const double> z) { return conv_forward(*shared, z); };
  c.gradient = [shared](std::span<const double> z) { return conv_input_gradient(*shared, z); };
  return c;
}

void save_checkpoint(const FcNet& net, std::ostream& out) {
  check_finite(net.w, net.v);
  out << kMagic << " v1 fc d=" << net.dim() << " q=" << net.dim() << " m=" << net.width()
      << '\n';
  write_params(net.w, net.v, out);
}

void save_checkpoint(const ConvGapNet& net, std::ostream& out) {
  check_finite(net.w, net.v);
  out << kMagic << " v1 conv d=" << net.d << " q=" << net.patch() << " m=" << net.width()
      << '\n';
  write_params(net.w, net.v, out);
}

void save_checkpoint(const FcNet& net, const std::string& path) { save_to_path(net, path); }
void save_checkpoint(const ConvGapNet& net, const std::string& path) { save_to_path(net, path); }

FcNet load_fc_checkpoint(std::istream& in) {
  const Header h = read_header(in);
  require(h.kind == "fc" && h.q == h.d, ErrorCode::kIo, "checkpoint does not hold an fc net");
  FcNet net{MatrixXd(static_cast<Index>(h.m), static_cast<Index>(h.d)),
            VectorXd(static_cast<Index>(h.m))};
  read_params(net.w, net.v, in);
  return net;
}

ConvGapNet load_conv_checkpoint(std::istream& in) {
  const Header h = read_header(in);
  require(h.kind == "conv", ErrorCode::kIo, "checkpoint does not hold a conv net");
  ConvGapNet net{MatrixXd(static_cast<Index>(h.m), static_cast<Index>(h.q)),
                 VectorXd(static_cast<Index>(h.m)), h.d};
  read_params(net.w, net.v, in);
  return net;
}

FcNet load_fc_checkpoint(const std::string& path) {
  auto in = open_for_read(path);
  return load_fc_checkpoint(in);
}

ConvGapNet load_conv_checkpoint(const std::string& path) {
  auto in = open_for_read(path);
  return load_conv_checkpoint(in);
}

}  // namespace shiftlab

#include "bingham/table.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include "bingham/error.hpp"

namespace bingham {

namespace {

static_assert(std::endian::native == std::endian::little,
              "table serialization assumes a little-endian host");

constexpr char kMagic[4] = {'B', 'N', 'G', 'T'};

template <class T>
void put(std::vector<std::byte>& out, T v) {
  const auto* p = reinterpret_cast<const std::byte*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T get(std::span<const std::byte> in, std::size_t& offset) {
  if (offset + sizeof(T) > in.size()) {
    throw Error(ErrorCode::IoError, "truncated normalization table");
  }
  T v;
  std::memcpy(&v, in.data() + offset, sizeof(T));
  offset += sizeof(T);
  return v;
}

double log_range(const AxisSpec& a) { return std::log1p((a.max - a.min) / kGridScale); }

struct CatmullRom {
  std::array<double, 4> w;
  std::array<double, 4> dw;
};

CatmullRom catmull_rom(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {{0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2), 0.5 * (-3 * t3 + 4 * t2 + t),
           0.5 * (t3 - t2)},
          {0.5 * (-3 * t2 + 4 * t - 1), 0.5 * (9 * t2 - 10 * t), 0.5 * (-9 * t2 + 8 * t + 1),
           0.5 * (3 * t2 - 2 * t)}};
}

}  // namespace

GridSpec GridSpec::cube(double min, double max, std::uint32_t count) {
  GridSpec g;
  for (auto& a : g.axes) a = AxisSpec{min, max, count};
  return g;
}

void GridSpec::validate() const {
  for (const auto& a : axes) {
    if (!(a.min < a.max) || !std::isfinite(a.min) || !std::isfinite(a.max)) {
      throw Error(ErrorCode::InvalidArgument, "table axis needs finite min < max");
    }
    if (a.min < -500.0 || a.max > 0.0) {
      throw Error(ErrorCode::InvalidArgument, "table axis must lie within [-500, 0]");
    }
    if (a.count < 2) throw Error(ErrorCode::InvalidArgument, "table axis needs at least 2 nodes");
  }
}

NormalizationTable::NormalizationTable(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  build_padded();
}

double NormalizationTable::node(int axis, std::uint32_t index) const {
  const AxisSpec& a = grid_.axes[axis];
  if (index == 0) return a.min;
  if (index + 1 == a.count) return a.max;
  const double s = static_cast<double>(index) / static_cast<double>(a.count - 1);
  return a.max - kGridScale * std::expm1((1.0 - s) * log_range(a));
}

double NormalizationTable::value(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
  const auto& ax = grid_.axes;
  return values_[(static_cast<std::size_t>(i) * ax[1].count + j) * ax[2].count + k];
}

NormalizationTable NormalizationTable::build(const GridSpec& grid, unsigned threads) {
  grid.validate();
  const auto& ax = grid.axes;
  const std::uint32_t n1 = ax[0].count, n2 = ax[1].count, n3 = ax[2].count;
  const bool symmetric = ax[0].min == ax[1].min && ax[1].min == ax[2].min &&
                         ax[0].max == ax[1].max && ax[1].max == ax[2].max && n1 == n2 && n2 == n3;

  std::vector<std::array<std::uint32_t, 3>> jobs;
  for (std::uint32_t i = 0; i < n1; ++i)
    for (std::uint32_t j = symmetric ? i : 0; j < n2; ++j)
      for (std::uint32_t k = symmetric ? j : 0; k < n3; ++k) jobs.push_back({i, j, k});

  NormalizationTable probe(grid, std::vector<double>(std::size_t(n1) * n2 * n3, 0.0));
  std::vector<double> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < jobs.size(); idx = next++) {
      const auto& [i, j, k] = jobs[idx];
      results[idx] = log_F_quadrature(Eigen::Vector3d(probe.node(0, i), probe.node(1, j), probe.node(2, k)));
    }
  };
  const unsigned nthreads = std::max(1u, threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<double> values(std::size_t(n1) * n2 * n3);
  auto at = [&](std::uint32_t i, std::uint32_t j, std::uint32_t k) -> double& {
    return values[(std::size_t(i) * n2 + j) * n3 + k];
  };
  for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
    auto [i, j, k] = jobs[idx];
    if (!symmetric) {
      at(i, j, k) = results[idx];
      continue;
    }
    std::array<std::uint32_t, 3> p = {i, j, k};
    std::sort(p.begin(), p.end());
    do {
      at(p[0], p[1], p[2]) = results[idx];
    } while (std::next_permutation(p.begin(), p.end()));
  }
  return NormalizationTable(grid, std::move(values));
}

void NormalizationTable::build_padded() {
  const auto& ax = grid_.axes;
  const std::array<std::size_t, 3> n = {ax[0].count, ax[1].count, ax[2].count};
  const std::array<std::size_t, 3> p = {n[0] + 2, n[1] + 2, n[2] + 2};
  padded_.assign(p[0] * p[1] * p[2], 0.0);
  auto pidx = [&](std::size_t i, std::size_t j, std::size_t k) { return (i * p[1] + j) * p[2] + k; };
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k)
        padded_[pidx(i + 1, j + 1, k + 1)] = values_[(i * n[1] + j) * n[2] + k];

  // Ghost layers, one axis at a time; later axes see earlier ghosts so the
  // corners are extrapolated along every axis.
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t len = n[axis];
    std::array<std::size_t, 3> idx{};
    auto ref = [&](std::size_t pos) -> double& {
      std::array<std::size_t, 3> q = idx;
      q[axis] = pos;
      return padded_[pidx(q[0], q[1], q[2])];
    };
    const std::size_t o1 = (axis + 1) % 3, o2 = (axis + 2) % 3;
    for (std::size_t a = 0; a < p[o1]; ++a) {
      for (std::size_t b = 0; b < p[o2]; ++b) {
        idx[o1] = a;
        idx[o2] = b;
        if (len >= 3) {
          ref(0) = 3 * ref(1) - 3 * ref(2) + ref(3);
          ref(len + 1) = 3 * ref(len) - 3 * ref(len - 1) + ref(len - 2);
        } else {
          ref(0) = 2 * ref(1) - ref(2);
          ref(len + 1) = 2 * ref(len) - ref(len - 1);
        }
      }
    }
  }
}

bool NormalizationTable::contains(const Eigen::Vector3d& lambda) const {
  for (int a = 0; a < 3; ++a) {
    if (!(lambda[a] >= grid_.axes[a].min && lambda[a] <= grid_.axes[a].max)) return false;
  }
  return true;
}

double NormalizationTable::position(int axis, double lambda, double* dpos_dlambda) const {
  const AxisSpec& a = grid_.axes[axis];
  const double lr = log_range(a);
  const double span = static_cast<double>(a.count - 1);
  *dpos_dlambda = span / (lr * (kGridScale + a.max - lambda));
  return span * (1.0 - std::log1p((a.max - lambda) / kGridScale) / lr);
}

LogNormalizer NormalizationTable::eval(const Eigen::Vector3d& lambda) const {
  const auto& ax = grid_.axes;
  std::array<std::size_t, 3> cell{};
  std::array<CatmullRom, 3> cr;
  std::array<double, 3> dpos{};
  for (int a = 0; a < 3; ++a) {
    const double pos = position(a, lambda[a], &dpos[a]);
    const auto hi = static_cast<double>(ax[a].count - 2);
    const double base = std::clamp(std::floor(pos), 0.0, hi);
    cell[a] = static_cast<std::size_t>(base);
    cr[a] = catmull_rom(std::clamp(pos - base, 0.0, 1.0));
  }
  const std::size_t p1 = ax[1].count + 2, p2 = ax[2].count + 2;
  LogNormalizer out;
  double g0 = 0.0, g1 = 0.0, g2 = 0.0;
  // Padded index of node (cell - 1) is cell, so the 4x4x4 stencil starts there.
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double* row = &padded_[((cell[0] + i) * p1 + cell[1] + j) * p2 + cell[2]];
      double s = 0.0, ds = 0.0;
      for (int k = 0; k < 4; ++k) {
        s += cr[2].w[k] * row[k];
        ds += cr[2].dw[k] * row[k];
      }
      out.log_F += cr[0].w[i] * cr[1].w[j] * s;
      g0 += cr[0].dw[i] * cr[1].w[j] * s;
      g1 += cr[0].w[i] * cr[1].dw[j] * s;
      g2 += cr[0].w[i] * cr[1].w[j] * ds;
    }
  }
  out.grad = Eigen::Vector3d(g0 * dpos[0], g1 * dpos[1], g2 * dpos[2]);
  return out;
}

LogNormalizer NormalizationTable::interpolate(const Eigen::Vector3d& lambda) const {
  if (!contains(lambda)) {
    throw Error(ErrorCode::OutOfRange, "concentration outside the normalization table grid");
  }
  return eval(lambda);
}

LogNormalizer NormalizationTable::interpolate_clamped(const Eigen::Vector3d& lambda,
                                                      std::array<bool, 3>* clamped) const {
  Eigen::Vector3d c = lambda;
  std::array<bool, 3> flags{};
  for (int a = 0; a < 3; ++a) {
    const double lo = grid_.axes[a].min, hi = grid_.axes[a].max;
    if (c[a] < lo) {
      c[a] = lo;
      flags[a] = true;
    } else if (c[a] > hi) {
      c[a] = hi;
      flags[a] = true;
    }
  }
  LogNormalizer out = eval(c);
  for (int a = 0; a < 3; ++a)
    if (flags[a]) out.grad[a] = 0.0;
  if (clamped) *clamped = flags;
  return out;
}

std::vector<std::byte> NormalizationTable::serialize() const {
  std::vector<std::byte> out;
  out.reserve(4 + 4 + 3 * 20 + values_.size() * 8);
  for (char ch : kMagic) out.push_back(static_cast<std::byte>(ch));
  put(out, kFormatVersion);
  for (const auto& a : grid_.axes) {
    put(out, a.min);
    put(out, a.max);
    put(out, a.count);
  }
  for (double v : values_) put(out, v);
  return out;
}

NormalizationTable NormalizationTable::deserialize(std::span<const std::byte> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::IoError, "not a normalization table (bad magic)");
  }
  std::size_t off = 4;
  const auto version = get<std::uint32_t>(bytes, off);
  if (version != kFormatVersion) {
    throw Error(ErrorCode::IoError, "unsupported table version " + std::to_string(version));
  }
  GridSpec grid;
  for (auto& a : grid.axes) {
    a.min = get<double>(bytes, off);
    a.max = get<double>(bytes, off);
    a.count = get<std::uint32_t>(bytes, off);
  }
  grid.validate();
  const std::size_t n = std::size_t(grid.axes[0].count) * grid.axes[1].count * grid.axes[2].count;
  if (bytes.size() != off + n * sizeof(double)) {
    throw Error(ErrorCode::IoError, "normalization table payload has the wrong size");
  }
  std::vector<double> values(n);
  for (auto& v : values) {
    v = get<double>(bytes, off);
    if (!std::isfinite(v)) throw Error(ErrorCode::IoError, "non-finite value in table");
  }
  return NormalizationTable(grid, std::move(values));
}

void NormalizationTable::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

NormalizationTable NormalizationTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open table '" + path.string() + "'");
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(std::as_bytes(std::span<const char>(buf)));
}

}  // namespace bingham

#include "finsler/grid.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <deque>
#include <sstream>

#include <json.hpp>

#include "finsler/errors.hpp"
#include "finsler/io.hpp"

namespace finsler {

GridDomain::GridDomain(std::size_t dim, std::array<std::size_t, 3> nodes, double h,
                       std::array<double, 3> lower, std::vector<std::uint8_t> mask)
    : dim_(dim), nodes_(nodes), h_(h), lower_(lower), mask_(std::move(mask)) {
  if (dim_ < 1 || dim_ > 3) throw ConfigurationError("grid dimension must be 1, 2 or 3");
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw ConfigurationError("grid spacing h must be > 0");
  for (std::size_t a = dim_; a < 3; ++a) nodes_[a] = 1;
  for (std::size_t a = 0; a < dim_; ++a) {
    if (nodes_[a] < 1) throw ConfigurationError("grid needs at least one node per axis");
  }
  stride_ = {1, nodes_[0], nodes_[0] * nodes_[1]};
  size_ = nodes_[0] * nodes_[1] * nodes_[2];
  if (mask_.size() != size_) throw ConfigurationError("mask size does not match the grid");
  cell_volume_ = std::pow(h_, static_cast<double>(dim_));

  std::vector<std::uint8_t> active(size_, 0);
  for (std::size_t idx = 0; idx < size_; ++idx) {
    if (!mask_[idx]) continue;
    mask_[idx] = 1;
    ++mask_count_;
    masked_.push_back(idx);
    active[idx] = 1;
    for (std::size_t a = 0; a < dim_; ++a) {
      const std::size_t nb = neighbor(idx, a, -1);
      if (nb != kNoNode) active[nb] = 1;
    }
  }
  if (mask_count_ == 0) throw ConfigurationError("grid mask is empty");
  if (!connected(mask_)) throw ConfigurationError("grid mask is not connected");
  for (std::size_t idx = 0; idx < size_; ++idx) {
    if (active[idx]) active_.push_back(idx);
  }
}

GridDomain GridDomain::from_predicate(std::size_t dim, std::size_t cells, double h, double lo,
                                      const std::function<bool(const double*)>& inside) {
  if (cells < 2) throw ConfigurationError("grid needs at least two cells per axis");
  std::array<std::size_t, 3> nodes{1, 1, 1};
  for (std::size_t a = 0; a < dim; ++a) nodes[a] = cells + 1;
  const std::size_t size = nodes[0] * nodes[1] * nodes[2];
  std::vector<std::uint8_t> mask(size, 0);
  double x[3] = {0.0, 0.0, 0.0};
  for (std::size_t idx = 0; idx < size; ++idx) {
    std::size_t rem = idx;
    for (std::size_t a = 0; a < 3; ++a) {
      x[a] = lo + static_cast<double>(rem % nodes[a]) * h;
      rem /= nodes[a];
    }
    mask[idx] = inside(x) ? 1 : 0;
  }
  return GridDomain(dim, nodes, h, {lo, lo, lo}, std::move(mask));
}

GridDomain GridDomain::unit_box(std::size_t dim, std::size_t cells) {
  const double h = 1.0 / static_cast<double>(cells);
  const double eps = 0.5 * h;
  return from_predicate(dim, cells, h, 0.0, [dim, eps](const double* x) {
    for (std::size_t a = 0; a < dim; ++a) {
      if (x[a] < eps || x[a] > 1.0 - eps) return false;
    }
    return true;
  });
}

std::array<std::size_t, 3> GridDomain::unravel(std::size_t idx) const {
  return {idx % nodes_[0], (idx / nodes_[0]) % nodes_[1], idx / (nodes_[0] * nodes_[1])};
}

void GridDomain::coords(std::size_t idx, double* x) const {
  const auto ijk = unravel(idx);
  for (std::size_t a = 0; a < dim_; ++a) x[a] = lower_[a] + static_cast<double>(ijk[a]) * h_;
}

std::size_t GridDomain::neighbor(std::size_t idx, std::size_t axis, int dir) const {
  const std::size_t i = (idx / stride_[axis]) % nodes_[axis];
  if (dir > 0) return i + 1 < nodes_[axis] ? idx + stride_[axis] : kNoNode;
  return i > 0 ? idx - stride_[axis] : kNoNode;
}

std::vector<std::uint8_t> GridDomain::boundary_layer() const {
  std::vector<std::uint8_t> out(size_, 0);
  for (std::size_t idx : masked_) {
    for (std::size_t a = 0; a < dim_ && !out[idx]; ++a) {
      for (int dir : {-1, 1}) {
        const std::size_t nb = neighbor(idx, a, dir);
        if (nb == kNoNode || !mask_[nb]) {
          out[idx] = 1;
          break;
        }
      }
    }
  }
  return out;
}

std::uint64_t GridDomain::mask_hash() const {
  std::uint64_t h = 0xCBF29CE484222325ull;
  auto feed = [&h](std::uint64_t byte) {
    h ^= byte & 0xFFu;
    h *= 0x100000001B3ull;
  };
  for (std::size_t a = 0; a < 3; ++a) {
    for (int b = 0; b < 8; ++b) feed(static_cast<std::uint64_t>(nodes_[a]) >> (8 * b));
  }
  for (std::uint8_t m : mask_) feed(m);
  return h;
}

std::string GridDomain::mask_hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(mask_hash()));
  return buf;
}

bool GridDomain::connected(const std::vector<std::uint8_t>& marks) const {
  std::size_t first = kNoNode, total = 0;
  for (std::size_t idx = 0; idx < size_; ++idx) {
    if (marks[idx]) {
      if (first == kNoNode) first = idx;
      ++total;
    }
  }
  if (total == 0) return false;
  std::vector<std::uint8_t> seen(size_, 0);
  std::deque<std::size_t> queue{first};
  seen[first] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (std::size_t a = 0; a < dim_; ++a) {
      for (int dir : {-1, 1}) {
        const std::size_t nb = neighbor(cur, a, dir);
        if (nb != kNoNode && marks[nb] && !seen[nb]) {
          seen[nb] = 1;
          ++reached;
          queue.push_back(nb);
        }
      }
    }
  }
  return reached == total;
}

GridDomain GridDomain::with_mask(std::vector<std::uint8_t> mask) const {
  return GridDomain(dim_, nodes_, h_, lower_, std::move(mask));
}

// ---------------------------------------------------------------------------

GridFunction::GridFunction(GridPtr grid, double fill) : grid_(std::move(grid)) {
  if (!grid_) throw ArgumentError("grid function needs a grid");
  values_.assign(grid_->size(), fill);
}

GridFunction::GridFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw ArgumentError("grid function needs a grid");
  if (values_.size() != grid_->size()) {
    throw ArgumentError("grid function has " + std::to_string(values_.size()) +
                        " values for a grid of " + std::to_string(grid_->size()) + " nodes");
  }
}

GridFunction GridFunction::from_function(GridPtr grid,
                                         const std::function<double(const double*)>& f) {
  GridFunction out(grid);
  double x[3] = {0.0, 0.0, 0.0};
  for (std::size_t idx = 0; idx < grid->size(); ++idx) {
    grid->coords(idx, x);
    out.values_[idx] = f(x);
  }
  return out;
}

GridFunction GridFunction::restricted_to_mask() const {
  GridFunction out(grid_);
  for (std::size_t idx : grid_->mask_nodes()) out.values_[idx] = values_[idx];
  return out;
}

bool GridFunction::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

std::string to_csv(const GridFunction& f) {
  const GridDomain& g = f.grid();
  std::string out = "i,j,k,value\n";
  out.reserve(out.size() + g.size() * 32);
  char buf[96];
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const auto ijk = g.unravel(idx);
    const int len = std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%.17g\n", ijk[0], ijk[1], ijk[2],
                                  f[idx]);
    out.append(buf, static_cast<std::size_t>(len));
  }
  return out;
}

std::string header_json(const GridDomain& g) {
  nlohmann::json j;
  j["dims"] = std::vector<std::size_t>(g.shape().begin(), g.shape().begin() + g.dim());
  j["n"] = g.dim();
  j["h"] = g.h();
  j["lower"] = std::vector<double>{g.lower(0), g.lower(1), g.lower(2)};
  j["lower"].get_ref<nlohmann::json::array_t&>().resize(g.dim());
  j["mask_hash"] = g.mask_hash_hex();
  return j.dump(2) + "\n";
}

GridFunction from_csv(const std::string& csv, const std::string& header, GridPtr grid) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("grid header is not valid JSON: ") + e.what());
  }
  const auto dims = j.value("dims", std::vector<std::size_t>{});
  if (dims.size() != grid->dim()) throw ConfigurationError("grid header dimension mismatch");
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (dims[a] != grid->nodes(a)) throw ConfigurationError("grid header shape mismatch");
  }
  if (j.value("h", 0.0) != grid->h()) throw ConfigurationError("grid header spacing mismatch");
  if (j.value("mask_hash", std::string()) != grid->mask_hash_hex()) {
    throw ConfigurationError("grid header mask hash mismatch");
  }

  GridFunction out(grid);
  std::vector<std::uint8_t> seen(grid->size(), 0);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  if (line.rfind("i,j,k,value", 0) != 0) throw ConfigurationError("grid CSV is missing its header");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t ijk[3];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (auto& v : ijk) {
      auto r = std::from_chars(p, end, v);
      if (r.ec != std::errc() || r.ptr == end || *r.ptr != ',') {
        throw ConfigurationError("malformed grid CSV row: " + line);
      }
      p = r.ptr + 1;
    }
    double value = 0.0;
    auto r = std::from_chars(p, end, value);
    if (r.ec != std::errc()) throw ConfigurationError("malformed grid CSV value: " + line);
    for (std::size_t a = 0; a < 3; ++a) {
      if (ijk[a] >= grid->nodes(a)) throw ConfigurationError("grid CSV index out of range");
    }
    const std::size_t idx = grid->index(ijk[0], ijk[1], ijk[2]);
    out[idx] = value;
    seen[idx] = 1;
    ++rows;
  }
  if (rows != grid->size()) throw ConfigurationError("grid CSV does not cover every node");
  for (auto s : seen) {
    if (!s) throw ConfigurationError("grid CSV has duplicate rows");
  }
  return out;
}

void save_grid_function(const GridFunction& f, const std::string& csv_path,
                        const std::string& header_path) {
  write_file_atomic(csv_path, to_csv(f));
  write_file_atomic(header_path, header_json(f.grid()));
}

}  // namespace finsler

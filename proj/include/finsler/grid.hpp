#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace finsler {

inline constexpr std::size_t kNoNode = static_cast<std::size_t>(-1);

/// Uniform lattice in dimension 1..3 with a Dirichlet mask. Nodes off the
/// mask carry the value 0 for every test function; the mask must be
/// nonempty and connected (face neighbors).
class GridDomain {
 public:
  GridDomain(std::size_t dim, std::array<std::size_t, 3> nodes, double h,
             std::array<double, 3> lower, std::vector<std::uint8_t> mask);

  /// Lattice on [lo, lo + N h]^dim with N + 1 nodes per axis; the mask is
  /// every node whose coordinates satisfy `inside`.
  static GridDomain from_predicate(std::size_t dim, std::size_t cells, double h, double lo,
                                   const std::function<bool(const double*)>& inside);
  /// Unit cube [0,1]^dim with h = 1/cells; the mask is the interior nodes.
  static GridDomain unit_box(std::size_t dim, std::size_t cells);

  std::size_t dim() const { return dim_; }
  std::size_t nodes(std::size_t axis) const { return nodes_[axis]; }
  const std::array<std::size_t, 3>& shape() const { return nodes_; }
  std::size_t size() const { return size_; }
  double h() const { return h_; }
  double lower(std::size_t axis) const { return lower_[axis]; }
  double cell_volume() const { return cell_volume_; }

  bool in_mask(std::size_t idx) const { return mask_[idx] != 0; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  std::size_t mask_count() const { return mask_count_; }

  std::size_t index(std::size_t i, std::size_t j = 0, std::size_t k = 0) const {
    return i + nodes_[0] * (j + nodes_[1] * k);
  }
  std::array<std::size_t, 3> unravel(std::size_t idx) const;
  void coords(std::size_t idx, double* x) const;
  /// Neighbor along `axis` in direction +1 or -1, or kNoNode off the lattice.
  std::size_t neighbor(std::size_t idx, std::size_t axis, int dir) const;
  std::size_t stride(std::size_t axis) const { return stride_[axis]; }

  /// Nodes where a forward difference of a mask-supported function can be
  /// nonzero: the mask plus lattice predecessors of mask nodes.
  const std::vector<std::size_t>& active_nodes() const { return active_; }
  const std::vector<std::size_t>& mask_nodes() const { return masked_; }

  /// Mask nodes with a non-mask face neighbor (or on the lattice edge).
  std::vector<std::uint8_t> boundary_layer() const;

  /// FNV-1a over the shape and mask bytes.
  std::uint64_t mask_hash() const;
  std::string mask_hash_hex() const;

  /// Face-connectivity of the marked nodes of a lattice with this shape.
  bool connected(const std::vector<std::uint8_t>& marks) const;

  /// Same lattice, different mask.
  GridDomain with_mask(std::vector<std::uint8_t> mask) const;

 private:
  std::size_t dim_;
  std::array<std::size_t, 3> nodes_;
  std::array<std::size_t, 3> stride_;
  std::size_t size_;
  double h_;
  std::array<double, 3> lower_;
  double cell_volume_;
  std::vector<std::uint8_t> mask_;
  std::size_t mask_count_ = 0;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> masked_;
};

using GridPtr = std::shared_ptr<const GridDomain>;

/// Values at every lattice node of a domain.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(GridPtr grid, double fill = 0.0);
  GridFunction(GridPtr grid, std::vector<double> values);
  static GridFunction from_function(GridPtr grid, const std::function<double(const double*)>& f);

  const GridDomain& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  /// Copy with every non-mask node set to zero.
  GridFunction restricted_to_mask() const;
  bool all_finite() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// "i,j,k,value" rows with 17 significant digits.
std::string to_csv(const GridFunction& f);
/// {"dims", "n", "h", "lower", "mask_hash"}.
std::string header_json(const GridDomain& g);
/// Parses CSV rows for the given domain; the header must match its dims,
/// spacing and mask hash.
GridFunction from_csv(const std::string& csv, const std::string& header, GridPtr grid);
void save_grid_function(const GridFunction& f, const std::string& csv_path,
                        const std::string& header_path);

}  // namespace finsler

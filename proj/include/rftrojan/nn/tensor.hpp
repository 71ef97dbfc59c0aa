#pragma once

#include <cstddef>
#include <functional>
#include <new>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace rft::nn {

/// 64-byte aligned storage: vectorized reductions then start at the same
/// offset on every run, which keeps float results bit-reproducible.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

template <typename T>
struct Tensor {
  std::vector<int> dims;
  AlignedVector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> d, T fill = T(0)) : dims(std::move(d)), data(count(dims), fill) {}
  Tensor(std::vector<int> d, const std::vector<T>& values) : dims(std::move(d)), data(values.begin(), values.end()) {
    if (data.size() != count(dims)) throw std::invalid_argument("tensor value count does not match dims");
  }

  static std::size_t count(const std::vector<int>& d) {
    return std::accumulate(d.begin(), d.end(), std::size_t{1},
                           [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  }

  std::size_t size() const { return data.size(); }
  int rank() const { return static_cast<int>(dims.size()); }
  int dim(int i) const { return dims.at(static_cast<std::size_t>(i)); }
  /// Product of all dims after the leading (batch) one.
  std::size_t inner() const { return dims.empty() ? 0 : size() / static_cast<std::size_t>(dims[0]); }

  T& operator[](std::size_t i) { return data[i]; }
  const T& operator[](std::size_t i) const { return data[i]; }
  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  bool same_shape(const Tensor& o) const { return dims == o.dims; }
  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.dims = dims;
    out.data.assign(data.begin(), data.end());
    return out;
  }
};

inline std::string dims_str(const std::vector<int>& d) {
  std::string s = "[";
  for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
  return s + "]";
}

}  // namespace rft::nn

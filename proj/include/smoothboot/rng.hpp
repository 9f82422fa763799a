#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace smoothboot {

namespace detail {

constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

//! SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace detail

//! Names a random substream. A key is derived from a seed and extended by
//! hashing in a path of indices, e.g. `StreamKey(seed).child(m).child(b)`, so
//! the numbers a task sees depend only on its position in the task tree and
//! never on execution order.
class StreamKey
{
public:
  explicit constexpr StreamKey(std::uint64_t seed)
    : key_(detail::mix64(seed + detail::golden_gamma))
  {}

  constexpr StreamKey child(std::uint64_t index) const
  {
    return StreamKey(raw_tag{},
                     detail::mix64(key_ ^ detail::mix64(index + 0x632be59bd9b4e019ULL)));
  }

  constexpr std::uint64_t value() const { return key_; }

  friend constexpr bool operator==(StreamKey, StreamKey) = default;

private:
  struct raw_tag
  {};
  constexpr StreamKey(raw_tag, std::uint64_t key)
    : key_(key)
  {}

  std::uint64_t key_;
};

//! Counter-based generator: the i-th output is a pure function of (key, i).
//! Satisfies UniformRandomBitGenerator so it plugs into <random>
//! distributions.
class Stream
{
public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(StreamKey key)
    : key_(key.value())
  {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max()
  {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()()
  {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::golden_gamma);
  }

  constexpr std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

//! 0 means "all hardware threads".
inline unsigned resolve_threads(unsigned threads)
{
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  return threads;
}

//! Runs `fn(i)` for i in [0, count). Tasks must write only to their own
//! output slot; the first exception thrown by any task is rethrown.
template<class F>
void parallel_for(std::size_t count, unsigned threads, F&& fn)
{
  threads = static_cast<unsigned>(
    std::min<std::size_t>(resolve_threads(threads), count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }

  std::atomic<std::size_t> next{ 0 };
  std::atomic<bool> failed{ false };
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) {
        return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) {
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned k = 0; k < threads; ++k) {
    pool.emplace_back(worker);
  }
  pool.clear();
  if (error) {
    std::rethrow_exception(error);
  }
}

} // namespace smoothboot

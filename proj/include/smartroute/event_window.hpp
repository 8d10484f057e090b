#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "smartroute/errors.hpp"

namespace smartroute {

// Sliding mean over the last `e` binary outcomes; expanding mean while fewer
// than `e` outcomes exist; 1.0 before the first outcome.
class EventWindow {
 public:
  EventWindow() = default;

  explicit EventWindow(std::size_t length) : length_(length) {
    if (length == 0) throw ConfigError("event window length must be >= 1");
  }

  void update(int outcome) {
    if (buffer_.size() == length_) buffer_.erase(buffer_.begin());
    buffer_.push_back(static_cast<std::uint8_t>(outcome != 0));
    ++count_;
  }

  double read() const {
    if (buffer_.empty()) return 1.0;
    std::size_t sum = std::accumulate(buffer_.begin(), buffer_.end(), std::size_t{0});
    return static_cast<double>(sum) / static_cast<double>(buffer_.size());
  }

  const std::vector<std::uint8_t>& buffer() const { return buffer_; }
  std::size_t length() const { return length_; }
  std::uint64_t count() const { return count_; }

  // Used by snapshot restore only.
  void restore_state(std::vector<std::uint8_t> buffer, std::uint64_t count) {
    if (buffer.size() > length_) throw IoError("event window buffer exceeds its length");
    buffer_ = std::move(buffer);
    count_ = count;
  }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t length_ = 1;
  std::uint64_t count_ = 0;
};

}  // namespace smartroute

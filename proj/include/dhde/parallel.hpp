#pragma once

#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>

namespace dhde {

// Every data-parallel kernel takes an Exec. Exec::serial is the reference
// path the tests compare against; Exec::parallel must produce bit-identical
// results.
enum class Exec { serial, parallel };

int max_threads();

// Caps the OpenMP team size; n <= 0 leaves the runtime default.
void set_max_threads(int n);

// Exceptions must not cross an OpenMP region. Loop bodies run through
// capture(); afterwards rethrow() raises the exception of the lowest
// iteration index, which is the one a serial loop would have thrown.
class LoopErrors {
public:
  template <typename F>
  void capture(std::size_t index, F&& body) {
    try {
      body();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (index < index_) {
        index_ = index;
        error_ = std::current_exception();
      }
    }
  }

  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

private:
  std::mutex mutex_;
  std::size_t index_ = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error_;
};

}  // namespace dhde

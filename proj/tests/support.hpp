#pragma once

#include <gtest/gtest.h>

#include <functional>
#include <optional>

#include "sgrocc/errors.hpp"

namespace sgrocc::testing {

// Runs fn and reports which library error code it raised, if any.
inline std::optional<ErrorCode> error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace sgrocc::testing

#define EXPECT_ERROR(code, stmt) EXPECT_EQ(::sgrocc::testing::error_of([&] { stmt; }), ::sgrocc::ErrorCode::code)

#pragma once

#include <string>

#include <doctest.h>

#include "sepcov/error.hpp"

// Checks that expr throws sepcov::Error of the given kind.
#define CHECK_ERROR_KIND(expr, expected)                                              \
  do {                                                                                \
    try {                                                                             \
      (void)(expr);                                                                   \
      FAIL_CHECK("expected " << std::string(sepcov::to_string(expected)));            \
    } catch (const sepcov::Error& e_) {                                               \
      CHECK_MESSAGE(e_.kind() == (expected), std::string(sepcov::to_string(e_.kind()))); \
    }                                                                                 \
  } while (0)

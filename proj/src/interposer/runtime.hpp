// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Process-wide state of the preload library: configuration, resolved CPU
// entry points, the residency map and statistics.

#pragma once

#include <cstddef>
#include <cstdint>

#include "scilib/blas_model.hpp"

namespace scilib::interposer {

// Non-owning callable taking the operand pointers the kernel should use.
class KernelRef {
 public:
  template <class F>
  KernelRef(F& f) noexcept  // NOLINT(google-explicit-constructor)
      : obj_(&f), call_([](void* o, void* const* p) { (*static_cast<F*>(o))(p); }) {}

  void operator()(void* const* operands) const { call_(obj_, operands); }

 private:
  void* obj_;
  void (*call_)(void*, void* const*);
};

std::size_t routine_index(Routine r) noexcept;

// CPU implementation of routine `index` (the symbol with a trailing
// underscore found after this library). Aborts naming the symbol when the
// process has no such BLAS routine.
void* real_symbol(std::size_t index);

// Entry point for every intercepted call. `bases` are the operand pointers
// in BLAS argument order (A, B, C as applicable). A shape that does not
// form a valid call is forwarded untouched so the CPU BLAS reports it.
void intercept(std::size_t index, const CallShape& shape, const void* const* bases, std::size_t count,
               KernelRef kernel);

}  // namespace scilib::interposer

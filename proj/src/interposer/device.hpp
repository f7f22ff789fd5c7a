// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Device backends. Real accelerator execution is out of reach here, so the
// mock runs the CPU kernel and the caller accounts the work as DEVICE.

#pragma once

#include <functional>
#include <memory>

#include "scilib/runtime_config.hpp"

namespace scilib::interposer {

class DeviceBackend {
 public:
  virtual ~DeviceBackend() = default;
  // Called once before the first offloaded call (memory pools, library
  // handles). The mock has nothing to set up.
  virtual void init() {}
  // Returns false when the device could not run the kernel; the caller then
  // falls back to the CPU.
  virtual bool execute(const std::function<void()>& kernel) = 0;
};

class MockDevice final : public DeviceBackend {
 public:
  bool execute(const std::function<void()>& kernel) override {
    kernel();
    return true;
  }
};

class RejectingDevice final : public DeviceBackend {
 public:
  bool execute(const std::function<void()>&) override { return false; }
};

inline std::unique_ptr<DeviceBackend> make_device(DeviceKind kind) {
  if (kind == DeviceKind::kReject) return std::make_unique<RejectingDevice>();
  return std::make_unique<MockDevice>();
}

}  // namespace scilib::interposer

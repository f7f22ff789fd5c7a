// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#include "runtime.hpp"

#include <dlfcn.h>
#include <sys/syscall.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cerrno>
#include <cstdarg>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "device.hpp"
#include "json.hpp"
#include "scilib/policy.hpp"
#include "scilib/residency_map.hpp"
#include "scilib/runtime_config.hpp"
#include "scilib/trace.hpp"

namespace scilib::interposer {

namespace {

constexpr int kDeviceNode = 1;
constexpr int kMpolMfMove = 1 << 1;  // MPOL_MF_MOVE
constexpr std::size_t kMaxRoutines = 32;

std::uint64_t now_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

struct RoutineStats {
  std::atomic<std::uint64_t> intercepted{0};
  std::atomic<std::uint64_t> forwarded{0};
  std::atomic<std::uint64_t> offloaded{0};
  std::atomic<std::uint64_t> device_fallbacks{0};
};

class Runtime {
 public:
  static Runtime& get() {
    // Never destroyed: BLAS calls from other libraries' exit handlers must
    // still find a live runtime.
    static Runtime* rt = new Runtime();
    return *rt;
  }

  void* real(std::size_t index) {
    void* fn = real_[index];
    if (fn == nullptr) {
      const std::string name = all_routines()[index].name() + "_";
      std::fprintf(stderr, "scilib: fatal: no CPU BLAS provides '%s' (is a BLAS library linked?)\n", name.c_str());
      std::abort();
    }
    return fn;
  }

  void intercept(std::size_t index, const CallShape& shape, const void* const* bases, std::size_t count,
                 KernelRef kernel);
  void shutdown();

 private:
  Runtime();

  void forward(KernelRef kernel, const void* const* bases) {
    kernel(const_cast<void* const*>(bases));
  }
  bool run_staged(const BlasCall& call, KernelRef kernel, const void* const* bases);
  void migrate_os(const MovementPlan& plan);
  void write_trace(const TraceEvent& event);
  void log(int level, const char* fmt, ...) const __attribute__((format(printf, 3, 4)));

  RuntimeConfig cfg_;
  MigrationMode migration_ = MigrationMode::kSimulated;
  std::uint64_t page_size_ = 4096;
  std::uint64_t os_page_size_ = 4096;
  std::uint64_t load_ns_ = 0;
  std::array<void*, kMaxRoutines> real_{};
  std::array<RoutineStats, kMaxRoutines> stats_;
  std::atomic<std::uint64_t> bytes_moved_{0};
  std::atomic<std::uint64_t> migration_failures_{0};
  std::atomic<std::uint64_t> capacity_rejections_{0};

  std::unique_ptr<DeviceBackend> device_;
  std::once_flag device_init_;

  std::mutex map_mutex_;
  ResidencyMap map_;
  std::uint64_t tick_ = 0;
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> buffer_reuse_;

  std::mutex trace_mutex_;
  std::FILE* trace_ = nullptr;
  bool tracing_ = false;
  std::uint64_t next_seq_ = 0;
  bool shut_down_ = false;
};

thread_local bool t_inside = false;
thread_local std::uint64_t t_last_exit = 0;

Runtime::Runtime() : load_ns_(now_ns()) {
  std::vector<std::string> warnings;
  cfg_ = parse_runtime_config([](const char* name) { return std::getenv(name); }, warnings);
  for (const auto& w : warnings) log(1, "%s", w.c_str());

  const long sys_page = sysconf(_SC_PAGESIZE);
  os_page_size_ = sys_page > 0 ? static_cast<std::uint64_t>(sys_page) : 4096;
  page_size_ = cfg_.page_size.value_or(supported_page_size(os_page_size_) ? os_page_size_ : 4096);
  if (page_size_ < os_page_size_) page_size_ = os_page_size_;
  map_ = ResidencyMap(page_size_, cfg_.capacity_bytes.value_or(0));

  if (cfg_.migration) {
    migration_ = *cfg_.migration;
  } else {
    std::error_code ec;
    const bool numa_device = std::filesystem::exists("/sys/devices/system/node/node1", ec);
    migration_ = numa_device ? MigrationMode::kOsMovePages : MigrationMode::kSimulated;
  }
  device_ = make_device(cfg_.device);

  const auto& routines = all_routines();
  for (std::size_t i = 0; i < routines.size() && i < kMaxRoutines; ++i) {
    const std::string name = routines[i].name() + "_";
    real_[i] = dlsym(RTLD_NEXT, name.c_str());
    if (real_[i] == nullptr) log(2, "no CPU symbol '%s'", name.c_str());
  }

  if (cfg_.trace_path) {
    trace_ = std::fopen(cfg_.trace_path->c_str(), "w");
    if (trace_ == nullptr) {
      std::fprintf(stderr, "scilib: cannot write trace '%s': %s; statistics go to stderr only\n",
                   cfg_.trace_path->c_str(), std::strerror(errno));
    }
    tracing_ = trace_ != nullptr;
  }
  log(1, "mode=%s threshold=%g page_size=%" PRIu64 " migration=%s device=%s",
      std::string(policy_name(cfg_.mode)).c_str(), cfg_.threshold, page_size_,
      std::string(migration_name(migration_)).c_str(), std::string(device_name(cfg_.device)).c_str());
}

void Runtime::log(int level, const char* fmt, ...) const {
  if (cfg_.debug_level < level) return;
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  std::fprintf(stderr, "scilib: %s\n", buf);
}

// Mem-Copy on the mock device: every operand is staged into a private
// buffer, the kernel runs there and written operands are copied back. The
// whole span is staged even for pure outputs so bytes the kernel leaves
// untouched (ld padding, the other triangle) survive the copy back.
bool Runtime::run_staged(const BlasCall& call, KernelRef kernel, const void* const* bases) {
  bool executed = false;
  const bool ok = device_->execute([&] {
    std::array<std::unique_ptr<unsigned char[]>, 3> staging;
    std::array<void*, 3> ptrs{};
    for (std::size_t i = 0; i < call.operands.size(); ++i) {
      const std::size_t bytes = operand_bytes(call.operands[i]);
      staging[i].reset(new unsigned char[bytes]);
      std::memcpy(staging[i].get(), bases[i], bytes);
      ptrs[i] = staging[i].get();
    }
    kernel(ptrs.data());
    for (std::size_t i = 0; i < call.operands.size(); ++i) {
      if (call.operands[i].role == OperandRole::kInput) continue;
      std::memcpy(const_cast<void*>(bases[i]), staging[i].get(), operand_bytes(call.operands[i]));
    }
    executed = true;
  });
  return ok && executed;
}

void Runtime::migrate_os(const MovementPlan& plan) {
  std::vector<void*> pages;
  for (const auto& action : plan.actions) {
    for (const auto& run : action.runs) {
      for (std::uint64_t p = run.first; p < run.first + run.count; ++p) {
        for (std::uint64_t off = 0; off < page_size_; off += os_page_size_) {
          pages.push_back(reinterpret_cast<void*>(p * page_size_ + off));
        }
      }
    }
  }
  if (pages.empty()) return;
  std::vector<int> nodes(pages.size(), kDeviceNode);
  std::vector<int> status(pages.size(), 0);
  const long rc = syscall(SYS_move_pages, 0, pages.size(), pages.data(), nodes.data(), status.data(), kMpolMfMove);
  const int call_errno = rc < 0 ? errno : 0;
  int first_error = call_errno;
  std::vector<std::uint64_t> failed;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    if (rc >= 0 && status[i] >= 0) continue;
    if (first_error == 0) first_error = -status[i];
    failed.push_back(reinterpret_cast<std::uint64_t>(pages[i]) / page_size_);
  }
  if (failed.empty()) return;
  migration_failures_ += failed.size();
  log(1, "move_pages could not move %zu of %zu pages (%s); they stay on the host", failed.size(), pages.size(),
      std::strerror(first_error));
  std::lock_guard lock(map_mutex_);
  for (std::uint64_t page : failed) map_.demote(page);
}

void Runtime::write_trace(const TraceEvent& event) {
  std::lock_guard lock(trace_mutex_);
  if (shut_down_ || trace_ == nullptr) return;
  TraceEvent e = event;
  e.seq = next_seq_++;
  const std::string line = to_json_line(e);
  std::fwrite(line.data(), 1, line.size(), trace_);
  std::fputc('\n', trace_);
}

void Runtime::intercept(std::size_t index, const CallShape& shape, const void* const* bases, std::size_t count,
                        KernelRef kernel) {
  RoutineStats& st = stats_[index];
  ++st.intercepted;
  if (t_inside) {
    // Nested BLAS issued by the CPU BLAS itself.
    ++st.forwarded;
    forward(kernel, bases);
    return;
  }
  t_inside = true;
  const std::uint64_t enter = now_ns();
  const std::uint64_t host_ns = enter - (t_last_exit != 0 ? t_last_exit : load_ns_);

  std::vector<std::uint64_t> addrs(count);
  for (std::size_t i = 0; i < count; ++i) addrs[i] = reinterpret_cast<std::uint64_t>(bases[i]);
  BlasCall call;
  bool modeled = true;
  try {
    call = make_call(shape, addrs);
    validate(call);
  } catch (const InvalidCall& e) {
    modeled = false;
    log(2, "forwarding unmodeled call: %s", e.what());
  }
  call.thread = static_cast<std::uint64_t>(syscall(SYS_gettid));

  const bool offload = modeled && cfg_.mode != Policy::kCpuOnly && should_offload(call, cfg_.threshold);
  std::uint64_t moved = 0;
  if (!offload) {
    ++st.forwarded;
    forward(kernel, bases);
  } else {
    ++st.offloaded;
    std::call_once(device_init_, [this] { device_->init(); });
    bool ran = false;
    if (cfg_.mode == Policy::kMemCopy) {
      ran = run_staged(call, kernel, bases);
      if (ran) moved = plan_memcopy(call).bytes_moved();
    } else if (migration_ != MigrationMode::kNone) {
      MovementPlan plan;
      bool planned = true;
      {
        std::lock_guard lock(map_mutex_);
        try {
          const std::uint64_t tick = ++tick_;
          plan = cfg_.mode == Policy::kCounter ? plan_counter_emulated(call, map_, CounterEmulatorConfig{}, tick)
                                               : plan_first_use(call, map_, tick);
          for (std::size_t i = 0; i < call.operands.size(); ++i) {
            auto& n = buffer_reuse_[{call.operands[i].base, operand_bytes(call.operands[i])}];
            if (plan.operand_reused[i]) ++n;
          }
        } catch (const CapacityExceeded& e) {
          planned = false;
          ++capacity_rejections_;
          log(1, "%s: %s; running on the CPU", call.routine.name().c_str(), e.what());
        }
      }
      if (planned) {
        moved = plan.bytes_moved();
        if (migration_ == MigrationMode::kOsMovePages) migrate_os(plan);
        ran = device_->execute([&] { forward(kernel, bases); });
      }
    } else {
      ran = device_->execute([&] { forward(kernel, bases); });
    }
    if (!ran) {
      ++st.device_fallbacks;
      log(1, "%s: device did not run the call; using the CPU", call.routine.name().c_str());
      forward(kernel, bases);
    }
    log(2, "%s m=%" PRId64 " n=%" PRId64 " k=%" PRId64 " offloaded, %" PRIu64 " bytes moved",
        call.routine.name().c_str(), call.m, call.n, call.k, moved);
  }
  bytes_moved_ += moved;
  const std::uint64_t leave = now_ns();

  if (modeled && tracing_) {
    TraceEvent ev;
    ev.call = std::move(call);
    ev.decision = offload ? Decision::kOffload : Decision::kCpu;
    ev.bytes_moved = moved;
    ev.wall_ns = leave - enter;
    ev.host_ns = host_ns;
    write_trace(ev);
  }
  t_last_exit = leave;
  t_inside = false;
}

void Runtime::shutdown() {
  {
    std::lock_guard lock(trace_mutex_);
    if (shut_down_) return;
    shut_down_ = true;
  }

  const auto& routines = all_routines();
  std::uint64_t total_intercepted = 0;
  std::uint64_t total_offloaded = 0;
  std::uint64_t total_forwarded = 0;
  std::uint64_t total_fallbacks = 0;

  nlohmann::ordered_json doc;
  doc["mode"] = std::string(policy_name(cfg_.mode));
  doc["threshold"] = cfg_.threshold;
  doc["page_size"] = page_size_;
  doc["migration"] = std::string(migration_name(migration_));
  doc["device"] = std::string(device_name(cfg_.device));
  nlohmann::ordered_json per_routine = nlohmann::ordered_json::array();

  std::string table = "scilib: routine   intercepted    forwarded    offloaded    fallbacks\n";
  char row[160];
  for (std::size_t i = 0; i < routines.size() && i < kMaxRoutines; ++i) {
    const RoutineStats& st = stats_[i];
    const std::uint64_t n = st.intercepted.load();
    if (n == 0) continue;
    total_intercepted += n;
    total_forwarded += st.forwarded.load();
    total_offloaded += st.offloaded.load();
    total_fallbacks += st.device_fallbacks.load();
    std::snprintf(row, sizeof row, "scilib: %-7s %13" PRIu64 " %12" PRIu64 " %12" PRIu64 " %12" PRIu64 "\n",
                  routines[i].name().c_str(), n, st.forwarded.load(), st.offloaded.load(),
                  st.device_fallbacks.load());
    table += row;
    nlohmann::ordered_json r;
    r["routine"] = routines[i].name();
    r["intercepted"] = n;
    r["forwarded"] = st.forwarded.load();
    r["offloaded"] = st.offloaded.load();
    r["device_fallbacks"] = st.device_fallbacks.load();
    per_routine.push_back(std::move(r));
  }
  std::snprintf(row, sizeof row, "scilib: %-7s %13" PRIu64 " %12" PRIu64 " %12" PRIu64 " %12" PRIu64 "\n", "total",
                total_intercepted, total_forwarded, total_offloaded, total_fallbacks);
  table += row;

  nlohmann::ordered_json buffers = nlohmann::ordered_json::array();
  double reuse_sum = 0;
  std::uint64_t resident = 0;
  {
    std::lock_guard lock(map_mutex_);
    for (const auto& [key, reuse] : buffer_reuse_) {
      OperandSpan span;
      span.base = key.first;
      span.rows = static_cast<std::int64_t>(key.second);
      span.cols = 1;
      span.ld = span.rows;
      span.elem_bytes = 1;
      const bool on_device = map_.all_device(pages_of(span, page_size_));
      if (on_device) {
        reuse_sum += static_cast<double>(reuse);
        ++resident;
      }
      char base[24];
      std::snprintf(base, sizeof base, "0x%" PRIx64, key.first);
      nlohmann::ordered_json b;
      b["base"] = base;
      b["bytes"] = key.second;
      b["reuse"] = reuse;
      b["device_resident"] = on_device;
      buffers.push_back(std::move(b));
    }
  }
  const double mean_reuse = resident > 0 ? reuse_sum / static_cast<double>(resident) : 0.0;
  std::snprintf(row, sizeof row,
                "scilib: bytes moved %" PRIu64 ", mean reuse %.1f over %" PRIu64
                " resident buffers, migration failures %" PRIu64 ", capacity rejections %" PRIu64 "\n",
                bytes_moved_.load(), mean_reuse, resident, migration_failures_.load(), capacity_rejections_.load());
  table += row;
  if (::write(STDERR_FILENO, table.data(), table.size()) < 0) {
    // Nothing sensible to do if stderr is gone.
  }

  doc["routines"] = std::move(per_routine);
  doc["calls_intercepted"] = total_intercepted;
  doc["calls_forwarded"] = total_forwarded;
  doc["calls_offloaded"] = total_offloaded;
  doc["device_fallbacks"] = total_fallbacks;
  doc["bytes_moved"] = bytes_moved_.load();
  doc["migration_failures"] = migration_failures_.load();
  doc["capacity_rejections"] = capacity_rejections_.load();
  doc["mean_reuse"] = mean_reuse;
  doc["buffers"] = std::move(buffers);

  std::lock_guard lock(trace_mutex_);
  if (trace_ != nullptr) {
    std::fclose(trace_);
    trace_ = nullptr;
    std::ofstream out(*cfg_.trace_path + ".stats.json");
    if (out) out << doc.dump(2) << '\n';
  }
}

__attribute__((constructor)) void on_load() { Runtime::get(); }
__attribute__((destructor)) void on_unload() { Runtime::get().shutdown(); }

}  // namespace

std::size_t routine_index(Routine r) noexcept {
  const auto& routines = all_routines();
  for (std::size_t i = 0; i < routines.size(); ++i) {
    if (routines[i] == r) return i;
  }
  return 0;
}

void* real_symbol(std::size_t index) { return Runtime::get().real(index); }

void intercept(std::size_t index, const CallShape& shape, const void* const* bases, std::size_t count,
               KernelRef kernel) {
  Runtime::get().intercept(index, shape, bases, count, kernel);
}

}  // namespace scilib::interposer

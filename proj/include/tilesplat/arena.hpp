// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/stage_clock.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace tilesplat {

/// Grow-on-demand buffers: a resize past capacity allocates max(new_size, ceil(capacity * factor))
/// and holds old and new storage together for the copy window.
struct GrowthPolicy {
    double factor = 1.5;
};

/// Fixed budget: every allocation must fit in what is left of `budget_bytes`, and buffers can
/// never grow past the capacity they were created with (no resize copies, so no spikes).
struct PreallocatePolicy {
    std::uint64_t budget_bytes = 0;
};

using ArenaPolicy = std::variant<GrowthPolicy, PreallocatePolicy>;

struct BufferHandle {
    std::uint32_t id = 0;
    bool operator==(const BufferHandle&) const = default;
};

enum class ArenaEventKind { Alloc, Resize, Free };
std::string_view event_name(ArenaEventKind kind) noexcept;

struct ArenaEvent {
    double t_seconds = 0.0;
    ArenaEventKind kind = ArenaEventKind::Alloc;
    std::string name;
    std::uint64_t old_capacity = 0;
    std::uint64_t new_capacity = 0;
    std::uint64_t total = 0; // live capacity after the event
    std::uint64_t peak = 0;  // running peak after the event
    /// For reallocating resizes, how long the old capacity stays resident; zero otherwise.
    double copy_seconds = 0.0;
};

/// Accounting-only model of device memory: total is the sum of live capacities, peak is the
/// largest instantaneous footprint including the old buffer still held by an in-flight resize
/// copy. Copies run one at a time: a copy ends after the copy window or at the next arena
/// operation, whichever comes first.
class Arena {
public:
    explicit Arena(ArenaPolicy policy = GrowthPolicy{}, const Clock* clock = nullptr, double copy_window_seconds = 1e-3);

    /// capacity = max(size, reserve). Throws BudgetExceeded under PreallocatePolicy.
    BufferHandle alloc(std::string name, std::uint64_t size, std::uint64_t reserve = 0);
    void resize(BufferHandle h, std::uint64_t new_size);
    void free(BufferHandle h);

    std::uint64_t total_bytes() const noexcept { return total_; }
    std::uint64_t peak_bytes() const noexcept { return peak_; }
    /// Largest total_bytes seen so far (ignores copy windows).
    std::uint64_t max_total_bytes() const noexcept { return max_total_; }
    std::uint64_t size_of(BufferHandle h) const;
    std::uint64_t capacity_of(BufferHandle h) const;
    std::size_t resize_copies() const noexcept { return resize_copies_; }
    const std::vector<ArenaEvent>& trace() const noexcept { return trace_; }
    const ArenaPolicy& policy() const noexcept { return policy_; }

private:
    struct Buffer {
        std::string name;
        std::uint64_t size = 0;
        std::uint64_t capacity = 0;
        bool live = false;
    };
    struct InFlight {
        double until;
        std::uint64_t bytes;
    };

    Buffer& live_buffer(BufferHandle h);
    double now() const;
    std::uint64_t footprint(double t);
    void record(ArenaEventKind kind, const std::string& name, std::uint64_t old_cap, std::uint64_t new_cap, double t,
                double copy_seconds);

    ArenaPolicy policy_;
    const Clock* clock_;
    double copy_window_;
    std::vector<Buffer> buffers_;
    std::vector<InFlight> in_flight_;
    std::vector<ArenaEvent> trace_;
    std::uint64_t total_ = 0;
    std::uint64_t peak_ = 0;
    std::uint64_t max_total_ = 0;
    std::size_t resize_copies_ = 0;
};

/// Maximum footprint a sampler polling at `rate_hz` (t = 0, 1/rate, ...) would observe.
/// Spikes only exist during each resize's copy window (cut short by the next event). rate_hz = infinity samples right after
/// every event, which reproduces Arena::peak_bytes().
std::uint64_t poll_simulate(std::span<const ArenaEvent> trace, double rate_hz);

/// (peak / total - 1) * 100 rounded to the nearest integer. Throws ZeroTotal for total <= 0.
int overhead_percent(double peak, double total);

/// CSV columns: t_seconds,event,name,old_capacity,new_capacity,total,peak
void write_trace_csv(std::ostream& out, std::span<const ArenaEvent> trace);

/// Buffers whose size scales with the number of Gaussians, kept in lockstep with the cloud.
class GaussianBufferSet {
public:
    explicit GaussianBufferSet(Arena& arena) : arena_(&arena) {}

    /// Registers a buffer of `bytes_per_gaussian * count` bytes, reserving room for `reserve_count`.
    void add(std::string name, std::uint64_t bytes_per_gaussian, std::size_t count, std::size_t reserve_count = 0);
    /// Resizes every buffer for `count` Gaussians; returns how many reallocating copies happened.
    std::size_t sync(std::size_t count);
    std::size_t count() const noexcept { return count_; }

private:
    struct Entry {
        BufferHandle handle;
        std::uint64_t bytes_per_gaussian;
    };
    Arena* arena_;
    std::vector<Entry> entries_;
    std::size_t count_ = 0;
};

} // namespace tilesplat

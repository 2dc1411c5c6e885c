// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/arena.hpp"

#include "tilesplat/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace tilesplat {

std::string_view event_name(ArenaEventKind kind) noexcept {
    switch (kind) {
    case ArenaEventKind::Alloc: return "alloc";
    case ArenaEventKind::Resize: return "resize";
    case ArenaEventKind::Free: return "free";
    }
    return "?";
}

Arena::Arena(ArenaPolicy policy, const Clock* clock, double copy_window_seconds)
    : policy_(policy), clock_(clock), copy_window_(copy_window_seconds) {}

double Arena::now() const { return clock_ ? to_seconds(clock_->now()) : 0.0; }

Arena::Buffer& Arena::live_buffer(BufferHandle h) {
    if (h.id >= buffers_.size()) throw Error(ErrorCode::StaleHandle, "unknown buffer handle");
    auto& b = buffers_[h.id];
    if (!b.live) throw Error(ErrorCode::StaleHandle, "buffer '" + b.name + "' was already freed");
    return b;
}

std::uint64_t Arena::footprint(double t) {
    std::erase_if(in_flight_, [t](const InFlight& f) { return f.until <= t; });
    std::uint64_t bytes = total_;
    for (const auto& f : in_flight_) bytes += f.bytes;
    return bytes;
}

void Arena::record(ArenaEventKind kind, const std::string& name, std::uint64_t old_cap, std::uint64_t new_cap,
                   double t, double copy_seconds) {
    max_total_ = std::max(max_total_, total_);
    peak_ = std::max(peak_, footprint(t));
    trace_.push_back({t, kind, name, old_cap, new_cap, total_, peak_, copy_seconds});
}

BufferHandle Arena::alloc(std::string name, std::uint64_t size, std::uint64_t reserve) {
    const std::uint64_t capacity = std::max(size, reserve);
    if (const auto* pre = std::get_if<PreallocatePolicy>(&policy_)) {
        if (capacity > pre->budget_bytes - std::min(pre->budget_bytes, total_)) {
            throw Error(ErrorCode::BudgetExceeded,
                        fmt::format("'{}' needs {} bytes but only {} of {} remain", name, capacity,
                                    pre->budget_bytes - std::min(pre->budget_bytes, total_), pre->budget_bytes));
        }
    }
    const double t = now();
    in_flight_.clear();
    BufferHandle h{static_cast<std::uint32_t>(buffers_.size())};
    buffers_.push_back({name, size, capacity, true});
    total_ += capacity;
    record(ArenaEventKind::Alloc, name, 0, capacity, t, 0.0);
    return h;
}

void Arena::resize(BufferHandle h, std::uint64_t new_size) {
    auto& b = live_buffer(h);
    if (new_size <= b.capacity) {
        b.size = new_size;
        return;
    }
    if (std::holds_alternative<PreallocatePolicy>(policy_)) {
        throw Error(ErrorCode::BudgetExceeded,
                    fmt::format("'{}' cannot grow from {} to {} bytes under preallocation", b.name, b.capacity, new_size));
    }
    const double factor = std::get<GrowthPolicy>(policy_).factor;
    const auto grown = static_cast<std::uint64_t>(std::ceil(double(b.capacity) * factor));
    const std::uint64_t new_capacity = std::max(new_size, grown);
    const std::uint64_t old_capacity = b.capacity;
    const double t = now();

    // The old storage stays alive while its contents are copied into the new allocation. Copies
    // are serialized, so an earlier copy has always finished by the time this one starts.
    in_flight_.clear();
    in_flight_.push_back({t + copy_window_, old_capacity});
    total_ = total_ - old_capacity + new_capacity;
    b.capacity = new_capacity;
    b.size = new_size;
    ++resize_copies_;
    record(ArenaEventKind::Resize, b.name, old_capacity, new_capacity, t, copy_window_);
}

void Arena::free(BufferHandle h) {
    if (h.id >= buffers_.size()) throw Error(ErrorCode::StaleHandle, "unknown buffer handle");
    auto& b = buffers_[h.id];
    if (!b.live) throw Error(ErrorCode::DoubleFree, "buffer '" + b.name + "' freed twice");
    b.live = false;
    total_ -= b.capacity;
    in_flight_.clear();
    record(ArenaEventKind::Free, b.name, b.capacity, 0, now(), 0.0);
    b.size = b.capacity = 0;
}

std::uint64_t Arena::size_of(BufferHandle h) const { return const_cast<Arena*>(this)->live_buffer(h).size; }

std::uint64_t Arena::capacity_of(BufferHandle h) const { return const_cast<Arena*>(this)->live_buffer(h).capacity; }

std::uint64_t poll_simulate(std::span<const ArenaEvent> trace, double rate_hz) {
    if (trace.empty()) return 0;

    // Old capacities still held by resize copies, pruned as sample time advances.
    struct Copy {
        double until;
        std::uint64_t bytes;
    };
    std::vector<Copy> copies;
    std::size_t applied = 0; // events with t <= current instant
    auto advance_to = [&](double t, std::size_t limit) {
        while (applied < limit && trace[applied].t_seconds <= t) {
            const auto& e = trace[applied++];
            copies.clear();
            if (e.kind == ArenaEventKind::Resize && e.copy_seconds > 0.0) {
                copies.push_back({e.t_seconds + e.copy_seconds, e.old_capacity});
            }
        }
        std::erase_if(copies, [t](const Copy& c) { return c.until <= t; });
        if (applied == 0) return std::uint64_t{0};
        std::uint64_t bytes = trace[applied - 1].total;
        for (const auto& c : copies) bytes += c.bytes;
        return bytes;
    };

    std::uint64_t best = 0;
    if (std::isinf(rate_hz)) {
        for (std::size_t k = 0; k < trace.size(); ++k) best = std::max(best, advance_to(trace[k].t_seconds, k + 1));
        return best;
    }
    if (!(rate_hz > 0.0)) return 0;

    double end = 0.0;
    for (const auto& e : trace) end = std::max(end, e.t_seconds + e.copy_seconds);
    for (std::uint64_t i = 0;; ++i) {
        const double t = double(i) / rate_hz;
        if (t > end) break;
        best = std::max(best, advance_to(t, trace.size()));
    }
    return best;
}

int overhead_percent(double peak, double total) {
    if (!(total > 0.0)) throw Error(ErrorCode::ZeroTotal, "overhead needs a positive total");
    return static_cast<int>(std::lround((peak / total - 1.0) * 100.0));
}

void write_trace_csv(std::ostream& out, std::span<const ArenaEvent> trace) {
    out << "t_seconds,event,name,old_capacity,new_capacity,total,peak\n";
    for (const auto& e : trace) {
        out << fmt::format("{:.6f},{},{},{},{},{},{}\n", e.t_seconds, event_name(e.kind), e.name, e.old_capacity,
                           e.new_capacity, e.total, e.peak);
    }
}

void GaussianBufferSet::add(std::string name, std::uint64_t bytes_per_gaussian, std::size_t count,
                            std::size_t reserve_count) {
    const auto h = arena_->alloc(std::move(name), bytes_per_gaussian * count, bytes_per_gaussian * reserve_count);
    entries_.push_back({h, bytes_per_gaussian});
    count_ = count;
}

std::size_t GaussianBufferSet::sync(std::size_t count) {
    const auto before = arena_->resize_copies();
    for (const auto& e : entries_) arena_->resize(e.handle, e.bytes_per_gaussian * count);
    count_ = count;
    return arena_->resize_copies() - before;
}

} // namespace tilesplat

// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tilesplat {

using Micros = std::chrono::microseconds;

inline double to_seconds(Micros us) { return std::chrono::duration<double>(us).count(); }
Micros from_seconds(double seconds);

/// Monotonic time source with microsecond resolution.
class Clock {
public:
    virtual ~Clock() = default;
    virtual Micros now() const = 0;
};

class SteadyClock final : public Clock {
public:
    SteadyClock() : origin_(std::chrono::steady_clock::now()) {}
    Micros now() const override {
        return std::chrono::duration_cast<Micros>(std::chrono::steady_clock::now() - origin_);
    }

private:
    std::chrono::steady_clock::time_point origin_;
};

/// Manually advanced clock for tests.
class FakeClock final : public Clock {
public:
    Micros now() const override { return now_; }
    void advance(Micros d) { now_ += d; }
    void set(Micros t) { now_ = t; }

private:
    Micros now_{0};
};

/// Pipeline stages, in breakdown-table row order.
enum class StageId {
    ProjectionForward,
    IndexOffset,
    GenerateKeys,
    Sorting,
    TileRanges,
    RasterizationForward,
    CopyImageToDevice,
    LossGradient,
    RasterizationBackward,
    ProjBwdOptimizer,
    Densification,
};

inline constexpr std::size_t kStageCount = 11;
inline constexpr std::array<StageId, kStageCount> kAllStages = {
    StageId::ProjectionForward,  StageId::IndexOffset,       StageId::GenerateKeys,
    StageId::Sorting,            StageId::TileRanges,        StageId::RasterizationForward,
    StageId::CopyImageToDevice,  StageId::LossGradient,      StageId::RasterizationBackward,
    StageId::ProjBwdOptimizer,   StageId::Densification,
};

std::string_view stage_label(StageId id) noexcept;
/// Inverse of stage_label; returns false for unknown labels.
bool stage_from_label(std::string_view label, StageId& out) noexcept;

struct StageBreakdown {
    std::array<Micros, kStageCount> stages{};
    Micros total{0};
    Micros unaccounted{0};

    Micros& operator[](StageId id) { return stages[static_cast<std::size_t>(id)]; }
    Micros operator[](StageId id) const { return stages[static_cast<std::size_t>(id)]; }
    Micros stage_sum() const;
};

/// Accumulates wall time per stage. Stages may not nest.
class StageClock {
public:
    explicit StageClock(const Clock& clock) : clock_(&clock) {}

    template <typename Work> decltype(auto) with_stage(StageId stage, Work&& work) {
        Scope scope(*this, stage);
        return std::forward<Work>(work)();
    }

    Micros elapsed(StageId stage) const { return buckets_[static_cast<std::size_t>(stage)]; }
    std::size_t entries(StageId stage) const { return entries_[static_cast<std::size_t>(stage)]; }
    const Clock& clock() const { return *clock_; }

    /// Unaccounted = total - sum of stages. Throws NegativeUnaccounted when the stages exceed
    /// the total by more than the clock resolution.
    StageBreakdown finalize(Micros total) const;

private:
    class Scope {
    public:
        Scope(StageClock& owner, StageId stage);
        ~Scope();
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;

    private:
        StageClock& owner_;
        StageId stage_;
        Micros start_;
    };

    const Clock* clock_;
    std::array<Micros, kStageCount> buckets_{};
    std::array<std::size_t, kStageCount> entries_{};
    bool open_ = false;
};

/// Builds a breakdown from externally measured stage times.
StageBreakdown finalize_breakdown(const std::array<Micros, kStageCount>& stages, Micros total);

struct GroupedRow {
    std::string label;
    Micros seconds{0};
};

/// Coarse view: index offset, keys, sorting and tile ranges fold into "Tiling/Sorting";
/// image copy and loss gradient fold into "Loss". Other stages pass through; Unaccounted last.
std::vector<GroupedRow> group_rows(const StageBreakdown& b);

/// A named set of breakdown columns (e.g. one per scene).
struct BreakdownTable {
    std::vector<std::string> columns;
    std::vector<StageBreakdown> values;
};

/// Text table with one row per stage (or per group), Unaccounted, and Total, in seconds.
std::string render_breakdown_table(const BreakdownTable& table, bool grouped = false, int decimals = 1);

/// CSV: header "stage,<col>...", one line per stage label, then Unaccounted and Total.
void write_breakdown_csv(std::ostream& out, const BreakdownTable& table);

/// Reads the CSV above. Stage rows and Total are required; a given Unaccounted row is ignored
/// and recomputed.
BreakdownTable read_breakdown_csv(std::istream& in);

} // namespace tilesplat

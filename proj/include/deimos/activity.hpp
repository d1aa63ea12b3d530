#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <fstream>
#include <mutex>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "deimos/errors.hpp"
#include "deimos/grid.hpp"
#include "deimos/trips.hpp"

namespace deimos {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// The x-by-k demand matrix: entry (i, j) is the total activity weight
/// that fell in cell i during temporal unit j. Immutable once built.
struct ActivityMatrix {
    CountMatrix values;
    GridSpec grid;
    TemporalSpec temporal;
    std::int64_t dropped_count = 0; // out-of-grid or out-of-window weight

    std::int64_t cell_count() const { return values.rows(); }
    std::int64_t unit_count() const { return values.cols(); }
    std::int64_t total() const { return values.sum(); }
    bool all_zero() const { return total() == 0; }

    Eigen::MatrixXd as_real() const { return values.cast<double>(); }

    void validate() const {
        grid.validate();
        temporal.validate();
        if (values.rows() != grid.cell_count() || values.cols() != temporal.num_units)
            throw argument_error("activity matrix: dimensions do not match grid/temporal specs");
        if (dropped_count < 0 || (values.array() < 0).any())
            throw argument_error("activity matrix: negative counts");
    }
};

/// Aggregate points into the demand matrix. Out-of-grid and
/// out-of-window weight accumulates in dropped_count, so total input
/// weight is conserved: values.sum() + dropped_count == sum of weights.
inline ActivityMatrix build_activity_matrix(std::span<const PointRecord> points,
                                            const GridSpec& grid, const TemporalSpec& temporal) {
    grid.validate();
    temporal.validate();
    ActivityMatrix m;
    m.grid = grid;
    m.temporal = temporal;
    m.values = CountMatrix::Zero(grid.cell_count(), temporal.num_units);
    for (const PointRecord& p : points) {
        const auto cell = locate_cell(p.longitude, p.latitude, grid);
        const auto unit = temporal.unit_index(p.timestamp);
        if (cell && unit)
            m.values(*cell, *unit) += p.weight;
        else
            m.dropped_count += p.weight;
    }
    return m;
}

struct IngestResult {
    ActivityMatrix matrix;
    ParseStats stats;
};

namespace detail {

// Blocks of whole lines handed from the reader to parser workers.
struct LineBlock {
    std::string data;
    bool last = false;
};

class BlockQueue {
public:
    explicit BlockQueue(std::size_t capacity) : capacity_(capacity) {}

    void push(LineBlock&& block) {
        std::unique_lock lock(mutex_);
        not_full_.wait(lock, [&] { return blocks_.size() < capacity_; });
        blocks_.push_back(std::move(block));
        lock.unlock();
        not_empty_.notify_one();
    }

    bool pop(LineBlock& out) {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return !blocks_.empty(); });
        out = std::move(blocks_.front());
        if (out.last) {
            // leave the sentinel in place so every worker sees it
            lock.unlock();
            not_empty_.notify_one();
            return false;
        }
        blocks_.pop_front();
        lock.unlock();
        not_full_.notify_one();
        return true;
    }

private:
    std::size_t capacity_;
    std::deque<LineBlock> blocks_;
    std::mutex mutex_;
    std::condition_variable not_empty_, not_full_;
};

} // namespace detail

/// Ingest one or more trip CSV files into an activity matrix, parsing
/// record chunks in parallel. Per-chunk partial counts are merged by
/// integer addition, so the result is identical for any thread count.
inline IngestResult ingest_trip_files(const std::vector<std::string>& paths,
                                      const TripSchema& schema, const GridSpec& grid,
                                      const TemporalSpec& temporal, unsigned threads = 0) {
    grid.validate();
    temporal.validate();
    if (paths.empty()) throw argument_error("ingest: no input files");
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

    IngestResult result;
    result.matrix.grid = grid;
    result.matrix.temporal = temporal;
    result.matrix.values = CountMatrix::Zero(grid.cell_count(), temporal.num_units);

    std::mutex merge_mutex;
    const std::int64_t k = temporal.num_units;

    for (const std::string& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw io_error("ingest: cannot open '" + path + "'");

        // Resolve columns from the header before producing blocks.
        std::string header_line;
        if (!std::getline(in, header_line))
            throw io_error("ingest: '" + path + "' is empty, expected a header row");
        if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
        std::istringstream header_stream(header_line + "\n");
        CsvReader header_reader(header_stream);
        const detail::TripColumns cols = detail::resolve_columns(header_reader, schema);

        detail::BlockQueue queue(threads * 4);

        auto worker = [&] {
            std::vector<std::string_view> fields;
            PointRecord pickup, dropoff;
            std::unordered_map<std::int64_t, std::int64_t> local; // (cell * k + unit) -> weight
            ParseStats local_stats;
            std::int64_t local_dropped = 0;
            auto bin = [&](const PointRecord& p) {
                const auto cell = locate_cell(p.longitude, p.latitude, grid);
                const auto unit = temporal.unit_index(p.timestamp);
                if (cell && unit)
                    local[*cell * k + *unit] += p.weight;
                else
                    local_dropped += p.weight;
            };
            detail::LineBlock block;
            while (queue.pop(block)) {
                std::string_view rest(block.data);
                while (!rest.empty()) {
                    const std::size_t eol = rest.find('\n');
                    std::string_view line = rest.substr(0, eol);
                    rest = (eol == std::string_view::npos) ? std::string_view{} : rest.substr(eol + 1);
                    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
                    if (line.empty()) continue;
                    ++local_stats.rows_read;
                    if (!split_csv_fields(line, fields) ||
                        !detail::parse_trip_row(fields, cols, schema, pickup, dropoff)) {
                        ++local_stats.rows_rejected;
                        continue;
                    }
                    bin(pickup);
                    bin(dropoff);
                    local_stats.points += 2;
                }
            }
            std::scoped_lock lock(merge_mutex);
            for (const auto& [key, weight] : local)
                result.matrix.values(key / k, key % k) += weight;
            result.matrix.dropped_count += local_dropped;
            result.stats += local_stats;
        };

        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);

        constexpr std::size_t block_size = 1 << 22;
        std::string carry;
        std::vector<char> buffer(block_size);
        while (in) {
            in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
            const std::streamsize got = in.gcount();
            if (got <= 0) break;
            detail::LineBlock block;
            block.data = std::move(carry);
            block.data.append(buffer.data(), static_cast<std::size_t>(got));
            // cut at the last newline so rows never straddle blocks
            const std::size_t cut = block.data.rfind('\n');
            if (cut == std::string::npos) {
                carry = std::move(block.data);
                continue;
            }
            carry = block.data.substr(cut + 1);
            block.data.resize(cut + 1);
            queue.push(std::move(block));
        }
        if (!carry.empty()) queue.push(detail::LineBlock{std::move(carry), false});
        queue.push(detail::LineBlock{{}, true});
        for (auto& t : pool) t.join();
    }
    return result;
}

} // namespace deimos

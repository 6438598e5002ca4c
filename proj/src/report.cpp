#include "rbs/report.hpp"

#include <cinttypes>
#include <cstdarg>
#include <cstdio>

namespace rbs {

ReportFormat parse_format(const std::string& s) {
    if (s == "rows") return ReportFormat::Rows;
    if (s == "table") return ReportFormat::Table;
    if (s == "plot") return ReportFormat::Plot;
    throw ConfigError("unknown report format '" + s + "' (expected rows|table|plot)");
}

const char* format_extension(ReportFormat f) {
    switch (f) {
        case ReportFormat::Rows: return "rows";
        case ReportFormat::Table: return "txt";
        case ReportFormat::Plot: return "plot";
    }
    return "txt";
}

namespace {

void line(std::string& out, const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    out += buf;
    out += '\n';
}

std::string render_rows(const MetricsReport& r) {
    std::string o;
    line(o, "report %s", r.label.c_str());
    line(o, "count offered %" PRIu64, r.offered);
    line(o, "count finalized %" PRIu64, r.finalized);
    line(o, "count rejected %" PRIu64, r.rejected);
    line(o, "count dropped %" PRIu64, r.dropped);
    line(o, "tput per_tick %.6f", r.tput_per_tick);
    line(o, "tput per_sec %.6f", r.tput_per_sec);
    auto lat = [&](const char* kind, const LatencyStats& s) {
        line(o, "latency %s count %" PRIu64 " mean %.6f p50 %.6f p99 %.6f", kind, s.count,
             s.mean, s.p50, s.p99);
    };
    lat("all", r.lat_all);
    lat("intra", r.lat_intra);
    lat("cross", r.lat_cross);
    for (const EpochStats& e : r.epochs)
        line(o, "epoch %" PRIu64 " shards %u cost %" PRIu64 " sigma %.6f", e.epoch,
             e.n_shards, e.processed_cost, e.sigma);
    line(o, "series window %" PRId64, static_cast<int64_t>(r.series_window));
    for (size_t i = 0; i < r.tput_series.size(); ++i)
        line(o, "series tput %zu %" PRIu64, i, r.tput_series[i]);
    line(o, "consensus blocks %" PRIu64, r.blocks);
    line(o, "consensus messages %" PRIu64, r.messages);
    line(o, "consensus rounds_per_block %.6f", r.rounds_per_block);
    line(o, "consensus round_changes %" PRIu64, r.round_changes);
    line(o, "locks wait_mean %.6f", r.lock_wait_mean);
    line(o, "locks live_at_end %" PRIu64, r.live_locks_at_end);
    line(o, "aborts rate %.6f", r.abort_rate);
    line(o, "balance genesis %" PRIu64, r.genesis_total);
    line(o, "balance final %" PRIu64, r.final_total);
    line(o, "balance burned %" PRIu64, r.burned_fees);
    line(o, "trace digest %s", r.trace_digest.c_str());
    for (const auto& [name, v] : r.analytic) line(o, "analytic %s %.6f", name.c_str(), v);
    return o;
}

std::string render_table(const MetricsReport& r) {
    std::string o;
    line(o, "=== %s ===", r.label.c_str());
    line(o, "transactions   offered %-10" PRIu64 " finalized %-10" PRIu64
            " rejected %-8" PRIu64 " dropped %" PRIu64,
         r.offered, r.finalized, r.rejected, r.dropped);
    line(o, "throughput     %.4f tx/tick   %.2f tx/s", r.tput_per_tick, r.tput_per_sec);
    auto lat = [&](const char* kind, const LatencyStats& s) {
        line(o, "latency %-6s n=%-8" PRIu64 " mean=%-10.2f p50=%-8.1f p99=%.1f", kind,
             s.count, s.mean, s.p50, s.p99);
    };
    lat("all", r.lat_all);
    lat("intra", r.lat_intra);
    lat("cross", r.lat_cross);
    for (const EpochStats& e : r.epochs)
        line(o, "epoch %-4" PRIu64 " shards=%-4u cost=%-8" PRIu64 " sigma=%.3f", e.epoch,
             e.n_shards, e.processed_cost, e.sigma);
    line(o, "consensus      blocks=%" PRIu64 " messages=%" PRIu64
            " rounds/block=%.3f round_changes=%" PRIu64,
         r.blocks, r.messages, r.rounds_per_block, r.round_changes);
    line(o, "locking        wait_mean=%.2f live_at_end=%" PRIu64 " abort_rate=%.4f",
         r.lock_wait_mean, r.live_locks_at_end, r.abort_rate);
    line(o, "conservation   genesis=%" PRIu64 " final=%" PRIu64 " burned=%" PRIu64 " %s",
         r.genesis_total, r.final_total, r.burned_fees,
         r.final_total + r.burned_fees == r.genesis_total ? "OK" : "VIOLATED");
    line(o, "trace digest   %s", r.trace_digest.c_str());
    line(o, "analytic models (reported side by side, never substituted):");
    for (const auto& [name, v] : r.analytic)
        line(o, "  %-26s %.6f", name.c_str(), v);
    return o;
}

std::string render_plot(const MetricsReport& r) {
    std::string o;
    line(o, "# series x y  (label=%s)", r.label.c_str());
    for (const EpochStats& e : r.epochs) {
        line(o, "sigma %" PRIu64 " %.6f", e.epoch, e.sigma);
        line(o, "epoch_cost %" PRIu64 " %" PRIu64, e.epoch, e.processed_cost);
        line(o, "n_shards %" PRIu64 " %u", e.epoch, e.n_shards);
    }
    for (size_t i = 0; i < r.tput_series.size(); ++i)
        line(o, "tput %zu %" PRIu64, i, r.tput_series[i]);
    line(o, "latency_p50_intra 0 %.6f", r.lat_intra.p50);
    line(o, "latency_p50_cross 0 %.6f", r.lat_cross.p50);
    line(o, "latency_p99_all 0 %.6f", r.lat_all.p99);
    return o;
}

}  // namespace

std::string render_report(const MetricsReport& rep, ReportFormat format) {
    switch (format) {
        case ReportFormat::Rows: return render_rows(rep);
        case ReportFormat::Table: return render_table(rep);
        case ReportFormat::Plot: return render_plot(rep);
    }
    return {};
}

}  // namespace rbs

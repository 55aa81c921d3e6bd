#ifndef CMJ_IO_HPP
#define CMJ_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cmj/sim.hpp"

namespace cmj::io {

/// Shortest decimal string that parses back to exactly `x` ('.' separator).
std::string format_double(double x);

/// Fixed column sets of the tabular outputs.
inline constexpr const char* kClustersHeader = "id,parent_id,birth_time,isolation_time,final_size,n_children";
inline constexpr const char* kSnapshotsHeader =
    "t,n_active_clusters,n_isolated_clusters,n_contagious,n_isolated_individuals";
inline constexpr const char* kDistHeader = "k,pi_a,pi_i,geometric_reference,m_a,m_i";
inline constexpr const char* kComparisonHeader =
    "k,empirical_active,empirical_isolated,pi_a,pi_i,geometric_reference";
inline constexpr const char* kParadoxHeader = "t,n_dead,dead_mean,lambda1_expectation,lambda_expectation";
inline constexpr const char* kOdeHeader = "t,log_total,growth_rate";
inline constexpr const char* kProfileHeader = "k,profile,pi_a";
inline constexpr const char* kYuleHeader = "k,empirical_active,yule_simon";
inline constexpr const char* kSummaryHeader =
    "replicate,seed,stop_reason,end_time,n_events,n_clusters,n_isolated_clusters,cumulative_infected,"
    "contagious_at_end";

/// A table cell: empty (missing value), number, count or text.
using Cell = std::variant<std::monostate, double, std::uint64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  explicit Table(const char* header);
  void add(std::vector<Cell> row);
};

/// Header line then one line per row; missing values are empty fields.
void write_csv(std::ostream& out, const Table& table);
/// JSON array of objects keyed by column, in column order; missing values are null.
void write_json(std::ostream& out, const Table& table);

Table clusters_table(const Trace& trace);
/// Totals replayed from the event log at each grid time.
Table snapshots_table(const Trace& trace, std::span<const double> times);
Table summary_table(std::span<const TraceSummary> summaries);

/// One JSON object per line:
///   {"time":T,"kind":"traceable_growth","cluster":C,"size":S}
///   {"time":T,"kind":"untraceable_birth","parent":P,"child":C}
///   {"time":T,"kind":"isolation","cluster":C,"size":S}
void write_events_jsonl(std::ostream& out, const Trace& trace);
std::vector<Event> read_events_jsonl(std::istream& in);

/// id,parent_id,birth_time,isolation_time,final_size,n_children; empty fields
/// for the ancestor's parent and for clusters still active.
void write_clusters_csv(std::ostream& out, const Trace& trace);
void write_snapshots_csv(std::ostream& out, const Trace& trace, std::span<const double> times);

}  // namespace cmj::io

#endif  // CMJ_IO_HPP

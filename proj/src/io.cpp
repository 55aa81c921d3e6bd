#include "cmj/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <type_traits>

#include <json.hpp>

namespace cmj::io {

std::string format_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("format_double: non-finite value");
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), end);
}

void write_events_jsonl(std::ostream& out, const Trace& trace) {
  for (const Event& e : trace.events) {
    out << "{\"time\":" << format_double(e.time) << ",\"kind\":\"" << to_string(e.kind) << "\",";
    switch (e.kind) {
      case EventKind::TraceableGrowth:
      case EventKind::Isolation:
        out << "\"cluster\":" << e.cluster << ",\"size\":" << e.size;
        break;
      case EventKind::UntraceableBirth:
        out << "\"parent\":" << e.cluster << ",\"child\":" << e.child;
        break;
    }
    out << "}\n";
  }
}

std::vector<Event> read_events_jsonl(std::istream& in) {
  std::vector<Event> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Event e;
      e.time = j.at("time").get<double>();
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "traceable_growth" || kind == "isolation") {
        e.kind = kind == "isolation" ? EventKind::Isolation : EventKind::TraceableGrowth;
        e.cluster = j.at("cluster").get<ClusterId>();
        e.size = j.at("size").get<std::uint64_t>();
      } else if (kind == "untraceable_birth") {
        e.kind = EventKind::UntraceableBirth;
        e.cluster = j.at("parent").get<ClusterId>();
        e.child = j.at("child").get<ClusterId>();
        e.size = 1;
      } else {
        throw std::runtime_error("unknown event kind '" + kind + "'");
      }
      events.push_back(e);
    } catch (const std::exception& err) {
      throw std::runtime_error("events.jsonl line " + std::to_string(lineno) + ": " + err.what());
    }
  }
  return events;
}

namespace {

std::vector<std::string> split_header(const char* header) {
  std::vector<std::string> columns;
  std::string cur;
  for (const char* c = header; *c; ++c) {
    if (*c == ',') {
      columns.push_back(cur);
      cur.clear();
    } else {
      cur += *c;
    }
  }
  columns.push_back(cur);
  return columns;
}

std::string render(const Cell& cell, bool json) {
  return std::visit(
      [json](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return json ? "null" : "";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          return std::to_string(v);
        } else {
          if (json) return nlohmann::json(v).dump();
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string quoted = "\"";
          for (char c : v) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
          return quoted + '"';
        }
      },
      cell);
}

}  // namespace

Table::Table(const char* header) : columns(split_header(header)) {}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::logic_error("Table: row width does not match the header");
  rows.push_back(std::move(row));
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << render(row[i], false);
    out << '\n';
  }
}

void write_json(std::ostream& out, const Table& table) {
  out << '[';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << (r ? ",\n {" : "\n {");
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      out << (i ? "," : "") << nlohmann::json(table.columns[i]).dump() << ':' << render(table.rows[r][i], true);
    }
    out << '}';
  }
  out << "\n]\n";
}

Table clusters_table(const Trace& trace) {
  Table table(kClustersHeader);
  for (const auto& c : trace.clusters) {
    Cell parent;
    if (c.parent_id) parent = std::uint64_t{*c.parent_id};
    Cell iso_time;
    Cell final_size;
    if (c.isolated()) {
      iso_time = *c.isolation_time();
      final_size = *c.final_size;
    }
    table.add({std::uint64_t{c.id}, parent, c.birth_time, iso_time, final_size,
               std::uint64_t{c.child_birth_ages.size()}});
  }
  return table;
}

Table snapshots_table(const Trace& trace, std::span<const double> times) {
  Table table(kSnapshotsHeader);
  Replayer replay(trace);
  for (double t : times) {
    replay.advance_to(t);
    table.add({t, std::uint64_t{replay.active_clusters()}, std::uint64_t{replay.isolated_clusters()},
               replay.contagious(), replay.isolated_individuals()});
  }
  return table;
}

Table summary_table(std::span<const TraceSummary> summaries) {
  Table table(kSummaryHeader);
  for (const auto& s : summaries) {
    table.add({std::uint64_t{s.index}, s.seed, std::string(to_string(s.stop_reason)), s.end_time,
               std::uint64_t{s.n_events}, std::uint64_t{s.n_clusters}, std::uint64_t{s.n_isolated_clusters},
               s.cumulative_infected, s.contagious_at_end});
  }
  return table;
}

void write_clusters_csv(std::ostream& out, const Trace& trace) { write_csv(out, clusters_table(trace)); }

void write_snapshots_csv(std::ostream& out, const Trace& trace, std::span<const double> times) {
  write_csv(out, snapshots_table(trace, times));
}

}  // namespace cmj::io

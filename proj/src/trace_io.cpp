#include "shbuf/trace_io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace shbuf {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::uint64_t parse_uint(std::string_view field, std::size_t line_no) {
  field = trim(field);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw ValidationError("line " + std::to_string(line_no) +
                          ": expected a non-negative integer, got '" +
                          std::string(field) + "'");
  }
  return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

void write_trace(std::ostream& out, const ArrivalSequence& sequence,
                 const std::string& spec_comment) {
  if (!spec_comment.empty()) out << "# spec: " << spec_comment << '\n';
  out << "slot,port\n";
  for (std::size_t t = 0; t < sequence.slots.size(); ++t) {
    for (PortId p : sequence.slots[t]) out << t << ',' << p << '\n';
  }
}

ArrivalSequence read_trace(std::istream& in) {
  ArrivalSequence seq;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "slot,port") {
        throw ValidationError("line " + std::to_string(line_no) +
                              ": expected header 'slot,port'");
      }
      header_seen = true;
      continue;
    }
    auto fields = split_commas(line);
    if (fields.size() == 3) {
      if (parse_uint(fields[2], line_no) != 1) {
        throw ValidationError("line " + std::to_string(line_no) +
                              ": variable packet sizes are not supported");
      }
    } else if (fields.size() != 2) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": expected 'slot,port'");
    }
    auto slot = parse_uint(fields[0], line_no);
    auto port = parse_uint(fields[1], line_no);
    if (slot + 1 < seq.slots.size()) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": slots must be non-decreasing");
    }
    if (port > UINT32_MAX || slot > UINT32_MAX) {
      throw ValidationError("line " + std::to_string(line_no) + ": value too large");
    }
    if (slot >= seq.slots.size()) seq.slots.resize(slot + 1);
    seq.slots[slot].push_back(static_cast<PortId>(port));
  }
  if (!header_seen) throw ValidationError("trace is missing the 'slot,port' header");
  return seq;
}

void write_outcomes(std::ostream& out, const RunResult& result) {
  out << "packet_slot,packet_pos,port,verdict\n";
  for (const auto& o : result.outcomes) {
    out << o.packet.slot << ',' << o.packet.pos << ',' << o.port << ','
        << to_string(o.verdict) << '\n';
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace shbuf

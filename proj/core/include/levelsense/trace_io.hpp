#pragma once

#include <iosfwd>
#include <string>

#include "levelsense/trace.hpp"

namespace levelsense {

// Two interchangeable trace encodings:
//
// binary ("CSIT", little-endian):
//   magic "CSIT" | u16 format version | u16 n_rx | u16 n_tx |
//   u16 n_subcarriers | f64 packet_rate | f64 carrier_wavelength |
//   u64 frame_count | u32 metadata byte length | metadata (UTF-8 JSON object,
//   string values) | frames
//   frame: f64 timestamp, then n_rx * n_subcarriers (f32 re, f32 im) pairs,
//   antenna-major (all subcarriers of antenna 0, then antenna 1, ...).
//
// jsonl:
//   line 1: header object {"format_version","n_rx","n_tx","n_subcarriers",
//           "packet_rate_hz","carrier_wavelength_m","frame_count","metadata"}
//   each further line: {"t": <seconds>, "csi": [[[re,im],...] per antenna]}
enum class TraceFormat { binary, jsonl };

inline constexpr std::uint16_t kTraceFormatVersion = 1;
inline constexpr char kTraceMagic[4] = {'C', 'S', 'I', 'T'};

// Picks binary for ".csit", jsonl for ".jsonl"/".json"; anything else throws
// ErrorCode::config_error.
TraceFormat trace_format_for_path(const std::string& path);

// Readers throw Error with a code identifying the failure: bad_magic,
// bad_version, dimension_mismatch, truncated_payload,
// non_monotone_timestamps, malformed_input, io_error.
CsiTrace read_trace(const std::string& path);
CsiTrace read_trace(std::istream& in, TraceFormat format);

// Writers are lenient (an empty frame list is written as-is); writing the
// same trace twice produces byte-identical files.
void write_trace(const CsiTrace& trace, const std::string& path);
void write_trace(const CsiTrace& trace, std::ostream& out, TraceFormat format);

}  // namespace levelsense

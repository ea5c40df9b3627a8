#include "levelsense/trace_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "levelsense/errors.hpp"

namespace levelsense {

namespace {

using json = nlohmann::json;

// All multi-byte fields are little-endian regardless of host order.
void put_bytes(std::ostream& out, const unsigned char* bytes, std::size_t n) {
  out.write(reinterpret_cast<const char*>(bytes), static_cast<std::streamsize>(n));
}

void put_u16(std::ostream& out, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  put_bytes(out, b, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, b, 8);
}

void put_f64(std::ostream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void put_f32(std::ostream& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

bool get_bytes(std::istream& in, unsigned char* bytes, std::size_t n) {
  in.read(reinterpret_cast<char*>(bytes), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount()) == n;
}

std::uint16_t get_u16(std::istream& in) {
  unsigned char b[2];
  if (!get_bytes(in, b, 2))
    raise(ErrorCode::truncated_payload, "unexpected end of data in header");
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!get_bytes(in, b, 4))
    raise(ErrorCode::truncated_payload,
          std::string("unexpected end of data reading ") + what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in, const char* what) {
  unsigned char b[8];
  if (!get_bytes(in, b, 8))
    raise(ErrorCode::truncated_payload,
          std::string("unexpected end of data reading ") + what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in, const char* what) {
  return std::bit_cast<double>(get_u64(in, what));
}

float get_f32(std::istream& in, const char* what) {
  return std::bit_cast<float>(get_u32(in, what));
}

json metadata_to_json(const std::map<std::string, std::string>& metadata) {
  json obj = json::object();
  for (const auto& [k, v] : metadata) obj[k] = v;
  return obj;
}

std::map<std::string, std::string> metadata_from_json(const json& obj) {
  if (!obj.is_object())
    raise(ErrorCode::malformed_input, "trace metadata is not a JSON object");
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : obj.items()) {
    if (!v.is_string())
      raise(ErrorCode::malformed_input,
            "trace metadata value for '" + k + "' is not a string");
    out[k] = v.get<std::string>();
  }
  return out;
}

void check_monotone(const CsiTrace& trace, std::size_t index) {
  if (index > 0 && !(trace.frames[index - 1].timestamp <
                     trace.frames[index].timestamp)) {
    std::ostringstream os;
    os << "timestamp of frame " << index << " ("
       << trace.frames[index].timestamp << ") does not increase past frame "
       << index - 1 << " (" << trace.frames[index - 1].timestamp << ")";
    raise(ErrorCode::non_monotone_timestamps, os.str());
  }
}

void write_binary(const CsiTrace& trace, std::ostream& out) {
  put_bytes(out, reinterpret_cast<const unsigned char*>(kTraceMagic), 4);
  put_u16(out, kTraceFormatVersion);
  put_u16(out, trace.n_rx);
  put_u16(out, trace.n_tx);
  put_u16(out, trace.n_subcarriers);
  put_f64(out, trace.packet_rate_hz);
  put_f64(out, trace.carrier_wavelength_m);
  put_u64(out, trace.frames.size());
  std::string meta = metadata_to_json(trace.metadata).dump();
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  for (const CsiFrame& f : trace.frames) {
    put_f64(out, f.timestamp);
    for (Eigen::Index r = 0; r < f.values.rows(); ++r) {
      for (Eigen::Index c = 0; c < f.values.cols(); ++c) {
        put_f32(out, f.values(r, c).real());
        put_f32(out, f.values(r, c).imag());
      }
    }
  }
}

CsiTrace read_binary(std::istream& in) {
  unsigned char magic[4];
  if (!get_bytes(in, magic, 4))
    raise(ErrorCode::truncated_payload, "file shorter than the magic number");
  if (std::memcmp(magic, kTraceMagic, 4) != 0)
    raise(ErrorCode::bad_magic, "magic number is not 'CSIT'");
  std::uint16_t version = get_u16(in);
  if (version != kTraceFormatVersion)
    raise(ErrorCode::bad_version,
          "trace format version " + std::to_string(version) +
              ", this reader handles " + std::to_string(kTraceFormatVersion));
  CsiTrace trace;
  trace.n_rx = get_u16(in);
  trace.n_tx = get_u16(in);
  trace.n_subcarriers = get_u16(in);
  if (trace.n_rx == 0 || trace.n_subcarriers == 0)
    raise(ErrorCode::dimension_mismatch,
          "header declares a zero-sized frame grid");
  trace.packet_rate_hz = get_f64(in, "packet rate");
  trace.carrier_wavelength_m = get_f64(in, "carrier wavelength");
  std::uint64_t frame_count = get_u64(in, "frame count");
  std::uint32_t meta_len = get_u32(in, "metadata length");
  std::string meta(meta_len, '\0');
  in.read(meta.data(), static_cast<std::streamsize>(meta_len));
  if (static_cast<std::uint32_t>(in.gcount()) != meta_len)
    raise(ErrorCode::truncated_payload, "metadata block cut short");
  try {
    trace.metadata = metadata_from_json(json::parse(meta));
  } catch (const json::exception& e) {
    raise(ErrorCode::malformed_input,
          std::string("metadata is not valid JSON: ") + e.what());
  }
  trace.frames.resize(frame_count);
  for (std::uint64_t i = 0; i < frame_count; ++i) {
    CsiFrame& f = trace.frames[i];
    f.timestamp = get_f64(in, "frame timestamp");
    f.values.resize(trace.n_rx, trace.n_subcarriers);
    for (Eigen::Index r = 0; r < f.values.rows(); ++r) {
      for (Eigen::Index c = 0; c < f.values.cols(); ++c) {
        float re = get_f32(in, "frame payload");
        float im = get_f32(in, "frame payload");
        f.values(r, c) = {re, im};
      }
    }
    check_monotone(trace, i);
  }
  if (in.peek() != std::char_traits<char>::eof())
    raise(ErrorCode::malformed_input, "trailing bytes after the last frame");
  return trace;
}

void write_jsonl(const CsiTrace& trace, std::ostream& out) {
  json header;
  header["format_version"] = kTraceFormatVersion;
  header["n_rx"] = trace.n_rx;
  header["n_tx"] = trace.n_tx;
  header["n_subcarriers"] = trace.n_subcarriers;
  header["packet_rate_hz"] = trace.packet_rate_hz;
  header["carrier_wavelength_m"] = trace.carrier_wavelength_m;
  header["frame_count"] = trace.frames.size();
  header["metadata"] = metadata_to_json(trace.metadata);
  out << header.dump() << '\n';
  for (const CsiFrame& f : trace.frames) {
    json line;
    line["t"] = f.timestamp;
    json csi = json::array();
    for (Eigen::Index r = 0; r < f.values.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < f.values.cols(); ++c)
        row.push_back({f.values(r, c).real(), f.values(r, c).imag()});
      csi.push_back(std::move(row));
    }
    line["csi"] = std::move(csi);
    out << line.dump() << '\n';
  }
}

CsiTrace read_jsonl(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    raise(ErrorCode::truncated_payload, "missing header line");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    raise(ErrorCode::malformed_input,
          std::string("header line is not valid JSON: ") + e.what());
  }
  CsiTrace trace;
  try {
    int version = header.at("format_version").get<int>();
    if (version != kTraceFormatVersion)
      raise(ErrorCode::bad_version,
            "trace format version " + std::to_string(version) +
                ", this reader handles " +
                std::to_string(kTraceFormatVersion));
    trace.n_rx = header.at("n_rx").get<std::uint16_t>();
    trace.n_tx = header.at("n_tx").get<std::uint16_t>();
    trace.n_subcarriers = header.at("n_subcarriers").get<std::uint16_t>();
    trace.packet_rate_hz = header.at("packet_rate_hz").get<double>();
    trace.carrier_wavelength_m =
        header.at("carrier_wavelength_m").get<double>();
    trace.metadata = metadata_from_json(header.at("metadata"));
  } catch (const json::exception& e) {
    raise(ErrorCode::malformed_input,
          std::string("header line is incomplete: ") + e.what());
  }
  std::uint64_t frame_count = 0;
  try {
    frame_count = header.at("frame_count").get<std::uint64_t>();
  } catch (const json::exception& e) {
    raise(ErrorCode::malformed_input,
          std::string("header line is incomplete: ") + e.what());
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      raise(ErrorCode::malformed_input, "line " + std::to_string(line_no) +
                                            " is not valid JSON: " + e.what());
    }
    CsiFrame f;
    try {
      f.timestamp = obj.at("t").get<double>();
      const json& csi = obj.at("csi");
      if (!csi.is_array() || csi.size() != trace.n_rx)
        raise(ErrorCode::dimension_mismatch,
              "line " + std::to_string(line_no) + ": expected " +
                  std::to_string(trace.n_rx) + " antenna rows");
      f.values.resize(trace.n_rx, trace.n_subcarriers);
      for (std::size_t r = 0; r < csi.size(); ++r) {
        const json& row = csi[r];
        if (!row.is_array() || row.size() != trace.n_subcarriers)
          raise(ErrorCode::dimension_mismatch,
                "line " + std::to_string(line_no) + " antenna " +
                    std::to_string(r) + ": expected " +
                    std::to_string(trace.n_subcarriers) + " subcarriers");
        for (std::size_t c = 0; c < row.size(); ++c) {
          const json& cell = row[c];
          if (!cell.is_array() || cell.size() != 2)
            raise(ErrorCode::malformed_input,
                  "line " + std::to_string(line_no) +
                      ": subcarrier cells must be [re, im]");
          f.values(static_cast<Eigen::Index>(r),
                   static_cast<Eigen::Index>(c)) = {
              cell[0].get<float>(), cell[1].get<float>()};
        }
      }
    } catch (const json::exception& e) {
      raise(ErrorCode::malformed_input,
            "line " + std::to_string(line_no) + ": " + e.what());
    }
    trace.frames.push_back(std::move(f));
    check_monotone(trace, trace.frames.size() - 1);
  }
  if (trace.frames.size() < frame_count)
    raise(ErrorCode::truncated_payload,
          "header promises " + std::to_string(frame_count) + " frames, file holds " +
              std::to_string(trace.frames.size()));
  if (trace.frames.size() > frame_count)
    raise(ErrorCode::malformed_input,
          "header promises " + std::to_string(frame_count) + " frames, file holds " +
              std::to_string(trace.frames.size()));
  return trace;
}

}  // namespace

TraceFormat trace_format_for_path(const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".csit") return TraceFormat::binary;
  if (ext == ".jsonl" || ext == ".json") return TraceFormat::jsonl;
  raise(ErrorCode::config_error,
        "cannot infer trace format from '" + path +
            "' (use .csit, .jsonl or .json)");
}

CsiTrace read_trace(std::istream& in, TraceFormat format) {
  return format == TraceFormat::binary ? read_binary(in) : read_jsonl(in);
}

CsiTrace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io_error, "cannot open '" + path + "' for reading");
  // Sniff the leading bytes: binary traces start with the magic, jsonl with
  // the header object.
  int first = in.peek();
  if (first == std::char_traits<char>::eof())
    raise(ErrorCode::truncated_payload, "'" + path + "' is empty");
  return read_trace(in, first == '{' ? TraceFormat::jsonl : TraceFormat::binary);
}

void write_trace(const CsiTrace& trace, std::ostream& out, TraceFormat format) {
  if (format == TraceFormat::binary)
    write_binary(trace, out);
  else
    write_jsonl(trace, out);
  if (!out) raise(ErrorCode::io_error, "trace write failed");
}

void write_trace(const CsiTrace& trace, const std::string& path) {
  TraceFormat format = trace_format_for_path(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  write_trace(trace, out, format);
  out.flush();
  if (!out) raise(ErrorCode::io_error, "trace write to '" + path + "' failed");
}

}  // namespace levelsense

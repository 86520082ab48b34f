#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "obeskit/common.hpp"

namespace obeskit::ingest {

enum class DeviceProfile { unknown, smartphone, smartwatch };
enum class StreamKind { accel, location };

std::string to_string(DeviceProfile p);
DeviceProfile device_profile_from_string(const std::string& s);

struct AccelSample {
    EpochMs t = 0;
    double x = 0.0, y = 0.0, z = 0.0;  // m/s^2, gravity included
};

struct LocationSample {
    EpochMs t = 0;
    double lat = 0.0, lon = 0.0;
    double accuracy = 0.0;  // meters
};

// One device's recording: either accelerometer or location samples,
// ordered by time, with per-stream metadata.
struct SensorStream {
    std::string subject_id;
    DeviceProfile device_profile = DeviceProfile::unknown;
    StreamKind kind = StreamKind::accel;
    std::string tz = "UTC";
    double nominal_rate_hz = 0.0;  // median inter-sample rate, estimated at parse
    std::vector<AccelSample> accel;
    std::vector<LocationSample> location;
    std::vector<std::string> warnings;
    std::size_t duplicates_dropped = 0;

    std::size_t size() const { return kind == StreamKind::accel ? accel.size() : location.size(); }
    bool empty() const { return size() == 0; }
    EpochMs first_t() const;
    EpochMs last_t() const;
};

struct CoverageSegment {
    EpochMs start_ms = 0;
    EpochMs end_ms = 0;
    bool recording = true;
};

// Contiguous partition of a stream's span into recording and gap segments.
struct CoverageMap {
    std::vector<CoverageSegment> segments;

    EpochMs span_ms() const;
    EpochMs recording_ms() const;
    bool is_recording(EpochMs t) const;
    // Total recording time intersecting [a, b).
    EpochMs recorded_between(EpochMs a, EpochMs b) const;
};

// A fixed-length window over a resampled stream: `first` indexes into the
// stream's sample vector; all frames in a set share length and rate.
struct Frame {
    EpochMs start_ms = 0;
    std::size_t first = 0;
};

struct FrameSet {
    double rate_hz = 0.0;
    std::size_t len_samples = 0;
    std::size_t hop_samples = 0;
    std::vector<Frame> frames;
    std::size_t flagged = 0;  // would-be frames dropped because they straddle a gap
};

// Reads JSONL or CSV (by extension, with content sniffing as fallback);
// sorts by time, drops duplicate timestamps keeping the first, estimates
// the nominal rate, and converts g-units to m/s^2 when declared.
SensorStream parse_stream(const std::string& path, StreamKind kind);

// Serializes a stream back to the JSONL form accepted by parse_stream.
void write_stream_jsonl(const SensorStream& s, const std::string& path);

CoverageMap compute_coverage(const SensorStream& s, double gap_threshold_s);

// Linear interpolation onto a uniform grid at target_hz, independently per
// recording segment; never interpolates across gaps.
SensorStream resample(const SensorStream& s, double target_hz, double gap_threshold_s = 5.0);

// Fixed-length frames aligned to segment starts. Frames that would straddle
// a gap are dropped and counted in `flagged`.
FrameSet window(const SensorStream& s, double len_s, double hop_s, double gap_threshold_s = 5.0);

constexpr double kCanonicalRateHz = 20.0;
constexpr double kAccelGapThresholdS = 5.0;
constexpr double kLocationGapThresholdS = 300.0;

}  // namespace obeskit::ingest

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace treecount {

// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class MalformedRecord : public Error {
public:
  MalformedRecord(int line_no, const std::string& detail)
      : Error("malformed record at line " + std::to_string(line_no) + ": " + detail),
        line_no_(line_no) {}
  int line_no() const { return line_no_; }

private:
  int line_no_;
};

class NonMonotoneFrame : public Error {
public:
  explicit NonMonotoneFrame(std::int64_t frame_index)
      : Error("frame index " + std::to_string(frame_index) + " does not increase"),
        frame_index_(frame_index) {}
  std::int64_t frame_index() const { return frame_index_; }

private:
  std::int64_t frame_index_;
};

class GeometryViolation : public Error {
public:
  using Error::Error;
};

class MalformedGpx : public Error {
public:
  using Error::Error;
};

class MissingTimestamps : public Error {
public:
  using Error::Error;
};

class NonMonotoneTime : public Error {
public:
  explicit NonMonotoneTime(double t)
      : Error("track time " + std::to_string(t) + " does not increase"), t_(t) {}
  double t() const { return t_; }

private:
  double t_;
};

class DegenerateTrack : public Error {
public:
  using Error::Error;
};

class OutOfProjectionRange : public Error {
public:
  using Error::Error;
};

class DegenerateSegment : public Error {
public:
  using Error::Error;
};

class UnassignedEvent : public Error {
public:
  using Error::Error;
};

class EmptyPointSet : public Error {
public:
  using Error::Error;
};

class EmptyEvalSet : public Error {
public:
  using Error::Error;
};

class InvalidScene : public Error {
public:
  using Error::Error;
};

}  // namespace treecount

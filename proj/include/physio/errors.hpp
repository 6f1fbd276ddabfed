#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "physio/types.hpp"

namespace physio {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PHYSIO_DEFINE_ERROR(Name)        \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

PHYSIO_DEFINE_ERROR(ParseError);
PHYSIO_DEFINE_ERROR(IoError);
PHYSIO_DEFINE_ERROR(EmptySignal);
PHYSIO_DEFINE_ERROR(InvalidBounds);
PHYSIO_DEFINE_ERROR(InvalidSpec);
PHYSIO_DEFINE_ERROR(DomainError);
PHYSIO_DEFINE_ERROR(TooShort);
PHYSIO_DEFINE_ERROR(EmptyDataset);
PHYSIO_DEFINE_ERROR(InvalidImage);
PHYSIO_DEFINE_ERROR(ChannelCountError);
PHYSIO_DEFINE_ERROR(RankError);
PHYSIO_DEFINE_ERROR(DimError);
PHYSIO_DEFINE_ERROR(NumericError);
PHYSIO_DEFINE_ERROR(EmptyEval);
PHYSIO_DEFINE_ERROR(InsufficientPairs);
PHYSIO_DEFINE_ERROR(ScheduleGap);
PHYSIO_DEFINE_ERROR(FormatError);
PHYSIO_DEFINE_ERROR(ConfigError);

#undef PHYSIO_DEFINE_ERROR

class MissingChannel : public Error {
 public:
  explicit MissingChannel(Channel c)
      : Error("missing channel " + std::string(file_name(c))), channel(c) {}
  Channel channel;
};

class RateMismatch : public Error {
 public:
  RateMismatch(Channel c, double found)
      : Error("rate mismatch on " + std::string(file_name(c)) + ": expected " +
              std::to_string(native_rate(c)) + " Hz, found " + std::to_string(found) + " Hz"),
        channel(c),
        found_hz(found) {}
  Channel channel;
  double found_hz;
};

class CorruptSample : public Error {
 public:
  CorruptSample(Channel c, std::size_t idx)
      : Error("non-finite sample in " + std::string(file_name(c)) + " at index " +
              std::to_string(idx)),
        channel(c),
        index(idx) {}
  Channel channel;
  std::size_t index;
};

class ManifestInconsistent : public Error {
 public:
  ManifestInconsistent(std::string stem_, Channel c, const std::string& path)
      : Error("manifest entry " + stem_ + "/" + std::string(folder_name(c)) +
              " points to missing file " + path),
        stem(std::move(stem_)),
        channel(c) {}
  std::string stem;
  Channel channel;
};

class EmptySplit : public Error {
 public:
  explicit EmptySplit(std::string who_, const std::string& what = "")
      : Error("empty split for " + who_ + (what.empty() ? "" : ": " + what)), who(std::move(who_)) {}
  std::string who;
};

}  // namespace physio

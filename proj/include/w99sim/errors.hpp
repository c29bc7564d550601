#pragma once

#include <stdexcept>
#include <string>

namespace w99sim
{

/// Invalid user-supplied configuration (network, flows, parameters).
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Input document does not follow the expected schema.
class ParseError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Inflow could not release queued vehicles for too long.
class CongestionError : public std::runtime_error
{
public:
  CongestionError(const std::string & what, double sim_time)
  : std::runtime_error(what), sim_time_(sim_time)
  {
  }
  double sim_time() const { return sim_time_; }

private:
  double sim_time_;
};

/// Engine invariant broken (same-lane overlap, bookkeeping mismatch). Always a bug.
class ConsistencyError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

class DegenerateDensityError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

class OptimizerInitError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

class CalibrationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace w99sim

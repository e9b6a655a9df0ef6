#ifndef DSL_ERROR_HPP
#define DSL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dsl
{

// Every domain failure carries the name of its error case (e.g. "CurvesIntersect"),
// which the CLI prints on stderr.
class Error : public std::runtime_error
{
public:
  Error(std::string kind, const std::string &detail)
  : std::runtime_error(kind + ": " + detail), _kind(std::move(kind))
  {}

  const std::string &kind() const noexcept
  { return _kind; }

private:
  std::string _kind;
};

} // namespace dsl

#endif // DSL_ERROR_HPP

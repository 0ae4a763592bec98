#pragma once

#include <iosfwd>

// Front end for the analytic model, the Monte Carlo estimator and the
// trace pipeline. Kept as a library function so tests can drive it
// in-process; the epiflow binary is a two-line wrapper.

namespace epiflow::cli {

// Exit code 0 on success, 1 for domain errors (bad parameter combinations,
// unreadable files), 2 for usage errors. Data rows go to `out` unless
// --out redirects them; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace epiflow::cli

#ifndef MH_CLI_HPP
#define MH_CLI_HPP

namespace mh::cli {

// Experiment runner entry point. Subcommands: simulate, order-sweep,
// cancel-verify, phi, regret, quad-mh, examples-fig, combinatorics-verify,
// dump. Returns 0 on success, 1 when a checked assertion fails, 2 on
// configuration or usage errors.
int run_cli(int argc, const char* const* argv);

}  // namespace mh::cli

#endif  // MH_CLI_HPP

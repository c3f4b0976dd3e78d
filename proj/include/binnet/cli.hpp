#ifndef BINNET_CLI_HPP
#define BINNET_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace binnet::cli {

// Exit codes: 0 success, 1 usage error, 2 data/model error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace binnet::cli

#endif

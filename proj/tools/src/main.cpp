#include "cli.hpp"

int main(int argc, char** argv) {
  return spk::cli::cli_dispatch(argc, argv);
}

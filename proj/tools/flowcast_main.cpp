// Command-line entry point. Subcommands are wired up in pipeline headers;
// this stub is grown as modules land.
#include <cstdio>

int main(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::puts("flowcast: pipeline not yet wired");
  return 0;
}

// End-to-end usage sample. Grown as modules land.
#include <cstdio>

int main() {
  std::puts("demo: pipeline not yet wired");
  return 0;
}

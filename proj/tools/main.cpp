#include <cstdio>

int main() {
  std::puts("mpcm: cli pending");
  return 0;
}

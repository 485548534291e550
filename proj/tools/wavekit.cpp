#include <cstdio>

int main() {
  std::puts("wavekit: placeholder");
  return 0;
}

#include <cstdio>

int main() {
  std::puts("nrm cli placeholder");
  return 0;
}

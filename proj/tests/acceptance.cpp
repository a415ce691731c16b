#include <cstdio>
int main() { std::puts("FAIL acceptance: not implemented"); return 1; }

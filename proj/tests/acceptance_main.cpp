#include "evonet/engine.hpp"
int main() { return 0; }

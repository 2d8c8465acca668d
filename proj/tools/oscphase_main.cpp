#include "oscphase/oscphase.hpp"
int main() { return 0; }

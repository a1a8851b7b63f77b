// Stdio fake backend: fake_backend <mode>

#include <iostream>
#include <string>

#include "fake_server.hpp"

int main(int argc, char** argv) {
  fake::Script s;
  if (argc > 1) s.mode = argv[1];
  fake::serve(
      s, [](std::string& line) { return static_cast<bool>(std::getline(std::cin, line)); },
      [](const std::string& line) { std::cout << line << '\n' << std::flush; });
  return 0;
}

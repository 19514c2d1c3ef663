#include <stdio.h>
#include <string.h>
#include "flyaut.h"

static int failures = 0;

static void expect(int cond, const char *what) {
  if (!cond) {
    fprintf(stderr, "FAIL: %s (last error: %s)\n", what, fly_last_error());
    failures++;
  }
}

int main(void) {
  FlyTerm *t = NULL;
  expect(fly_term_parse("add(1,2,oplus(port(1),port(2)))", &t) == FLY_STATUS_OK, "parse edge term");

  char *graph = NULL;
  expect(fly_term_eval(t, &graph) == FLY_STATUS_OK, "eval term");
  expect(strncmp(graph, "2 1\n", 4) == 0, "graph header");
  fly_string_free(graph);

  FlyAutomaton *col = NULL;
  expect(fly_formula_compile("(col X Y)", "X Y", &col) == FLY_STATUS_OK, "compile col");

  char *count = NULL;
  expect(fly_count(col, t, &count) == FLY_STATUS_OK, "count col on edge");
  expect(strcmp(count, "6") == 0, "edge has 6 colorings");
  fly_string_free(count);

  int verdict = -1;
  FlyAutomaton *sentence = NULL;
  expect(fly_formula_compile("(3colorable)", NULL, &sentence) == FLY_STATUS_OK, "compile sentence");
  expect(fly_check(sentence, t, &verdict) == FLY_STATUS_OK, "check sentence");
  expect(verdict == 1, "edge is 3-colorable");

  FlyTerm *bogus = NULL;
  expect(fly_term_parse("oplus(", &bogus) == FLY_STATUS_PARSE_ERROR, "parse error status");
  expect(strlen(fly_last_error()) > 0, "parse error message");

  fly_automaton_free(sentence);
  fly_automaton_free(col);
  fly_term_free(t);

  if (failures == 0) printf("c demo: all checks passed\n");
  return failures;
}

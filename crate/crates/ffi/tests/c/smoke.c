#include <math.h>
#include <stdio.h>
#include "dirrep.h"

#define CHECK(cond)                                              \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "check failed line %d: %s\n", __LINE__, #cond); \
      return 1;                                                  \
    }                                                            \
  } while (0)

int main(void) {
  DrQuery *q = NULL;
  CHECK(dr_query_new(3, 2, 0.05, DR_COMBINER_BONFERRONI, DR_RULE_AUTO, &q) == DR_STATUS_OK);

  double z[3] = {3.0, 3.0, 3.0};
  DrDirectionalResult res;
  CHECK(dr_directional_test(q, z, 3, &res) == DR_STATUS_OK);
  CHECK(fabs(res.p_plus - 0.0026997960632601) < 1e-12);
  CHECK(res.reject);
  CHECK(res.sign == DR_SIGN_POSITIVE);
  CHECK(res.rule_applied == DR_RULE_MIN);

  CHECK(dr_directional_test(q, z, 2, &res) == DR_STATUS_LENGTH_MISMATCH);
  CHECK(dr_last_error_message() != NULL);
  dr_query_free(q);

  double c;
  CHECK(dr_c_discordant(20, 10, 0.1, &c) == DR_STATUS_OK);
  CHECK(fabs(c - 0.03603306) < 1e-6);
  CHECK(dr_c_discordant(20, 11, 0.1, &c) == DR_STATUS_REGIME);

  double theta[20];
  for (int i = 0; i < 20; i++) theta[i] = i < 10 ? INFINITY : 0.0;
  CHECK(dr_c_exact_disjoint(theta, 20, 11, 0.1, &c) == DR_STATUS_OK);
  CHECK(fabs(c - 0.0956179249911956) < 1e-12);

  printf("ok\n");
  return 0;
}

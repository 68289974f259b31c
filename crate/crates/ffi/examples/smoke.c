#include <stdio.h>

#include "basislift.h"

int main(void) {
    const int64_t entries[4] = {3, 4, 1, 3};
    BlMatrix *a = NULL;
    BlModulus *q = NULL;
    BlLift *lift = NULL;
    BlVerifyReport report = {0};

    if (bl_matrix_new(2, 2, entries, &a) != BL_STATUS_OK) return 10;
    if (bl_modulus_new(2, 3, &q) != BL_STATUS_OK) return 11;
    if (bl_lift_finite(a, q, &lift) != BL_STATUS_OK) {
        fprintf(stderr, "%s\n", bl_last_error_message());
        return 12;
    }
    if (bl_lift_verify(lift, &report) != BL_STATUS_OK || !report.all_ok) return 13;

    char *json = bl_lift_to_json(lift);
    printf("%s\n", json);
    bl_string_free(json);

    BlModulus *bad = NULL;
    if (bl_modulus_from_prime_power(15, &bad) != BL_STATUS_NOT_A_PRIME_POWER) return 14;

    bl_lift_free(lift);
    bl_modulus_free(q);
    bl_matrix_free(a);
    return 0;
}

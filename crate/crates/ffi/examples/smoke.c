#include <stdio.h>
#include <stdlib.h>

#include "nles.h"

static const char *DOC =
    "[grid]\nn = 32\n"
    "[reference]\nforcing_wavenumber = 2\n"
    "[nudged]\nmodel = \"nse\"\n"
    "[observation]\nk_c = 5\n"
    "[harness]\nt_end = 1.0\nspinup_time = 0.5\nrecord_interval = 0.25\n";

int main(void) {
    size_t count = 0;
    if (nles_observed_mode_count(3, 256, 9, &count) != NLES_STATUS_OK) {
        return 1;
    }
    printf("observed modes: %zu\n", count);

    NlesExperiment *exp = NULL;
    if (nles_experiment_parse("[nudged]\ncfl = 1.5\n", &exp) == NLES_STATUS_OK) {
        return 1;
    }
    printf("rejected: %s\n", nles_last_error_message());

    if (nles_experiment_parse(DOC, &exp) != NLES_STATUS_OK) {
        fprintf(stderr, "%s\n", nles_last_error_message());
        return 1;
    }
    NlesSeries *series = NULL;
    if (nles_run_twin(exp, &series) != NLES_STATUS_OK) {
        fprintf(stderr, "%s\n", nles_last_error_message());
        return 1;
    }
    size_t len = nles_series_len(series);
    double *rel = malloc(len * sizeof(double));
    nles_series_column(series, NLES_SERIES_COLUMN_L2_REL, rel, len);
    printf("records: %zu  final l2_rel: %.3e\n", len, rel[len - 1]);
    free(rel);
    nles_series_free(series);
    nles_experiment_free(exp);
    return 0;
}

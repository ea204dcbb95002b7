#include <math.h>
#include <stdio.h>
#include <string.h>

#include "combadc.h"

int main(void) {
    CombadcScenario *sc = NULL;
    if (combadc_scenario_from_text("adc.bits = 30\n", &sc) != COMBADC_STATUS_VALIDATION_ERROR) return 1;
    char msg[256];
    size_t need = 0;
    if (combadc_last_error(msg, sizeof msg, &need) != COMBADC_STATUS_OK) return 2;
    if (strstr(msg, "bits-range") == NULL) return 3;

    if (combadc_scenario_from_text("scm.n_channels = 10\n", &sc) != COMBADC_STATUS_OK) return 4;
    combadc_scenario_free(sc);

    enum { N = 65536 };
    static double x[N];
    for (int i = 0; i < N; i++) x[i] = cos(2.0 * M_PI * 4097.0 * i / 16384.0);
    CombadcMetrics m;
    if (combadc_sine_metrics(x, N, 1e9, 4097.0 * 1e9 / 16384.0, &m) != COMBADC_STATUS_OK) return 5;
    if (!(m.sinad_db > 100.0)) return 6;
    printf("%s sinad=%.1f\n", combadc_version(), m.sinad_db);
    return 0;
}

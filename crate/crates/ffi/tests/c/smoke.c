#include "freqbeam.h"

int main(void) {
    FbConfig *cfg = fb_config_new_default();
    FbHistogram *hist = NULL;
    FbFit *fit = NULL;
    double alpha = 0.0, sigma = 0.0;
    if (fb_synthetic_histogram(cfg, FB_MODE_CROSS, 7, &hist) != FB_STATUS_OK) return 1;
    if (fb_fit(hist, cfg, &fit) != FB_STATUS_OK) return 2;
    fb_fit_estimate(fit, 3, &alpha, &sigma);
    fb_fit_free(fit);
    fb_histogram_free(hist);
    fb_config_free(cfg);
    return fb_last_error()[0] == '\0' ? 0 : 3;
}

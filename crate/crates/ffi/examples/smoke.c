#include <stdio.h>
#include "quadtrap.h"

int main(void) {
    QtParams *p = NULL;
    if (qt_params_published(QT_DELTA_SOURCE_CAPTION, &p) != QT_STATUS_OK) {
        return 1;
    }
    double state[6] = {0.112615, 0.0, 0.0, 0.0, 0.0887981, 0.430698};
    QtTrajectory *t = NULL;
    QtStatus s = qt_orbit_integrate(p, state, 10.0, 0.0, 0.0, &t);
    if (s != QT_STATUS_OK) {
        char msg[256];
        qt_last_error(msg, sizeof msg);
        fprintf(stderr, "%s\n", msg);
        return 2;
    }
    double last[9];
    qt_trajectory_sample(t, qt_trajectory_len(t) - 1, last);
    printf("tau=%g energy=%.12f\n", last[0], last[8]);
    qt_trajectory_free(t);
    qt_params_free(p);

    QtParams *bad = NULL;
    if (qt_params_raw(-1.0, 0.0, &bad) != QT_STATUS_INVALID_ARGUMENT) {
        return 3;
    }
    return 0;
}

# Quasilinear Uniqueness Certificates

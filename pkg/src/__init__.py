# MICI fusion source package
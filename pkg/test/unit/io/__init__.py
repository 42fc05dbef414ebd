from . import modelfile_test, report_test

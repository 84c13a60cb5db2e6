import sys

from aws_lambda_powertools import Logger

# stdout carries reports, so log lines go to stderr
logger = Logger(service="sparq-bench", stream=sys.stderr)

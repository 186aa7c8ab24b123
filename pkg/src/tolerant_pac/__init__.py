"""Tolerant adversarially robust PAC learners and their verification harness."""

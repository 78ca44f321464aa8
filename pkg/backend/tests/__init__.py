# Backend tests
